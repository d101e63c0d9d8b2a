#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mospa/parallel.hpp"
#include "mospa_cli/run.hpp"
#include "mospa_cli/scenario_io.hpp"

namespace mospa::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kScenarios = MOSPA_SCENARIO_DIR;

json fig1_doc() { return read_json(kScenarios / "fig1.json"); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mospa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    parallel::set_thread_count(0);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const json& doc) const {
    std::ofstream(path(name)) << doc.dump();
    return path(name);
  }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "mospa");
    log_.str("");
    return run(args, log_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  // Non-comment CSV lines.
  static std::vector<std::string> rows(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST(ParseScenario, BundledTwoTarget) {
  const Scenario s = parse_scenario(kScenarios / "fig1.json");
  EXPECT_EQ(s.n_targets, 2u);
  EXPECT_EQ(s.state_dim, 1u);
  EXPECT_EQ(s.seed, 1u);
  EXPECT_EQ(s.sample_count, 2000u);
  ASSERT_EQ(s.mixture.components().size(), 2u);
  EXPECT_EQ(s.mixture.components()[0].mean, Eigen::Vector2d(-4.0, 3.0));
  EXPECT_FALSE(s.q.has_value());
}

TEST(ParseScenario, PlanarWithQ) {
  const Scenario s = parse_scenario(kScenarios / "three-targets-planar.json");
  EXPECT_EQ(s.n_targets, 3u);
  EXPECT_EQ(s.state_dim, 2u);
  ASSERT_TRUE(s.q.has_value());
  EXPECT_EQ(s.q->n_targets(), 3u);
}

TEST(ParseScenario, FieldErrors) {
  auto expect_field = [](json doc, const std::string& field) {
    try {
      scenario_from_json(doc);
      ADD_FAILURE() << "accepted, expected error at " << field;
    } catch (const ScenarioError& e) {
      EXPECT_EQ(e.field(), field) << e.what();
    }
  };
  json d = fig1_doc();
  d["mixture"][0]["weight"] = 0.6;
  expect_field(d, "mixture.weights");

  d = fig1_doc();
  d.erase("n_targets");
  expect_field(d, "n_targets");

  d = fig1_doc();
  d["state_dim"] = 0;
  expect_field(d, "state_dim");

  d = fig1_doc();
  d["mixture"][1]["mean"] = json::array({1.0});
  expect_field(d, "mixture[1].mean");

  d = fig1_doc();
  d["mixture"][0]["cov"] = json::array({json::array({1.0, 0.0}), json::array({0.0, -1.0})});
  expect_field(d, "mixture[0].cov");

  d = fig1_doc();
  d["q_matrix"] = json::array({json::array({1.0})});
  expect_field(d, "q_matrix");
}

TEST(ScenarioDigest, IgnoresKeyOrderAndWhitespace) {
  const json a = fig1_doc();
  const json b = json::parse(a.dump(4));
  EXPECT_EQ(scenario_digest(a), scenario_digest(b));
  EXPECT_EQ(scenario_digest(a).size(), 64u);
  json c = a;
  c["seed"] = 2;
  EXPECT_NE(scenario_digest(a), scenario_digest(c));
}

TEST(FormatReal, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) {
    EXPECT_EQ(std::stod(format_real(x)), x);
  }
  EXPECT_EQ(format_real(0.5), "0.5");
}

TEST_F(CliTest, VerifyBundledTwoTargetPasses) {
  const auto out = path("v.csv");
  EXPECT_EQ(call({"verify", "--scenario", (kScenarios / "fig1.json").string(), "--x-hat", "-4,3",
                  "--mode", "same-sample", "--output", out.string()}),
            kExitOk);
  const auto r = rows(out);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], "mospa_value,w2_squared,abs_diff,rel_diff,mode,tolerance,passed,sample_count");
  EXPECT_NE(r[1].find(",true,2000"), std::string::npos);
  const json report = json::parse(slurp(path("v.json")));
  EXPECT_EQ(report["subcommand"], "verify");
  EXPECT_EQ(report["scenario_digest"], scenario_digest(fig1_doc()));
  EXPECT_TRUE(report["payload"]["passed"].get<bool>());
  const std::string head = slurp(out).substr(0, 17);
  EXPECT_EQ(head, "# subcommand=veri");
}

TEST_F(CliTest, ExitCodes) {
  const std::string fig1 = (kScenarios / "fig1.json").string();
  const std::string out = path("o.csv").string();
  EXPECT_EQ(call({"mospa", "--scenario", fig1, "--x-hat", "-4,3", "--output", out}), kExitOk);
  // Usage errors.
  EXPECT_EQ(call({"mospa", "--scenario", fig1, "--output", out}), kExitUsage);
  EXPECT_EQ(call({"nonsense"}), kExitUsage);
  EXPECT_EQ(call({"verify", "--scenario", fig1, "--x-hat", "-4,3", "--mode", "bogus", "--output", out}),
            kExitUsage);
  // Validation errors.
  EXPECT_EQ(call({"mospa", "--scenario", fig1, "--x-hat", "1,2,3", "--output", out}),
            kExitValidation);
  EXPECT_EQ(call({"verify", "--scenario", fig1, "--x-hat", "1,1", "--output", out}),
            kExitValidation);
  json bad = fig1_doc();
  bad["mixture"][0]["weight"] = 0.6;
  EXPECT_EQ(call({"mospa", "--scenario", write("bad.json", bad).string(), "--x-hat", "-4,3",
                  "--output", out}),
            kExitValidation);
  EXPECT_NE(log_.str().find("mixture.weights"), std::string::npos) << log_.str();
  EXPECT_EQ(call({"voronoi", "--scenario", (kScenarios / "three-targets-planar.json").string(),
                  "--x-hat", "0,0,1,1,2,2", "--output", out}),
            kExitValidation);
}

TEST_F(CliTest, Prop1ExitsTwoOnlyForEqualWeightDisagreement) {
  json doc = fig1_doc();
  doc["mixture"][0]["mean"] = json::array({-0.5, 0.5});
  doc["mixture"][1]["mean"] = json::array({0.5, -0.5});
  const auto sc = write("close.json", doc).string();
  const std::string out = path("p.csv").string();
  EXPECT_EQ(call({"prop1", "--scenario", sc, "--x-hat", "-0.5,0.5", "--samples", "20000",
                  "--output", out}),
            kExitOk);
  EXPECT_NE(rows(out)[1].rfind(",true"), std::string::npos);
  EXPECT_EQ(call({"prop1", "--scenario", sc, "--x-hat", "-0.5,0.5", "--samples", "20000",
                  "--weights", "0.5,0", "--output", out}),
            kExitOk);
  const json report = json::parse(slurp(path("p.json")));
  EXPECT_LT(report["payload"]["agreement"].get<double>(), 1.0);
  EXPECT_FALSE(report["payload"]["equal_weights"].get<bool>());
}

TEST_F(CliTest, MmospaTwoIidNormals) {
  const auto out = path("m.csv");
  EXPECT_EQ(call({"mmospa", "--scenario", (kScenarios / "two-iid-normals.json").string(),
                  "--samples", "100000", "--output", out.string()}),
            kExitOk);
  const auto r = rows(out);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], "target,x0");
  // Expected order statistics of two standard normals are -+1/sqrt(pi).
  const double a = std::stod(r[1].substr(2));
  const double b = std::stod(r[2].substr(2));
  EXPECT_NEAR(a, -0.5641895835, 0.02);
  EXPECT_NEAR(b, 0.5641895835, 0.02);
}

TEST_F(CliTest, VoronoiBundledTwoTarget) {
  const auto out = path("d.csv");
  EXPECT_EQ(call({"voronoi", "--scenario", (kScenarios / "fig1.json").string(), "--x-hat", "-4,3",
                  "--output", out.string()}),
            kExitOk);
  const auto r = rows(out);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], "i,j,ax,ay,bx,by");
  EXPECT_EQ(r[1], "0,1,-10,-10,10,10");
}

TEST_F(CliTest, OutputIndependentOfThreadCount) {
  const std::string planar = (kScenarios / "three-targets-planar.json").string();
  const std::vector<std::vector<std::string>> cases = {
      {"ospa", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "9000"},
      {"gospa", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "9000", "--q",
       "scenario"},
      {"mospa", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "20000"},
      {"mmospa", "--scenario", planar, "--samples", "20000"},
      {"masses", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "20000"},
      {"wasserstein", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "3000"},
      {"verify", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "3000"},
      {"prop1", "--scenario", planar, "--x-hat", "0,0,1,1,2,-1", "--samples", "20000"},
  };
  for (const auto& base : cases) {
    std::string text[2];
    std::string report[2];
    const char* threads[2] = {"1", "4"};
    for (int k = 0; k < 2; ++k) {
      auto args = base;
      const auto out = path("t" + std::to_string(k) + ".csv");
      args.insert(args.end(), {"--threads", threads[k], "--output", out.string()});
      ASSERT_EQ(call(args), kExitOk) << base[0] << ": " << log_.str();
      text[k] = slurp(out);
      auto j = out;
      j.replace_extension(".json");
      if (fs::exists(j)) report[k] = slurp(j);
    }
    EXPECT_EQ(text[0], text[1]) << base[0];
    EXPECT_EQ(report[0], report[1]) << base[0];
  }
}

}  // namespace
}  // namespace mospa::cli
