#include "mospa_cli/run.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "mospa/estimator.hpp"
#include "mospa/geometry.hpp"
#include "mospa/measure.hpp"
#include "mospa/metric.hpp"
#include "mospa/parallel.hpp"
#include "mospa/permutation.hpp"
#include "mospa/theorem.hpp"
#include "mospa/transport.hpp"
#include "mospa_cli/scenario_io.hpp"

namespace mospa::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string scenario;
  std::string x_hat;
  std::size_t samples = 0;
  std::optional<std::uint64_t> seed;
  std::string mode = "same-sample";
  std::string q = "identity";
  std::string bbox = "-10,10";
  std::string weights;
  std::string output;
  std::size_t threads = 0;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    while (first < last && *first == ' ') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw InvalidArgument(std::string(flag) + ": cannot parse '" + std::string(first, last) +
                            "' as a number");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

// Everything a subcommand needs once the flags are parsed.
struct Context {
  Options opt;
  std::string subcommand;
  json doc;
  std::string digest;
  Scenario scenario;
  std::size_t samples;

  std::uint64_t seed() const { return scenario.seed; }

  StackedState x_hat() const {
    const std::vector<double> v = parse_list(opt.x_hat, "--x-hat");
    if (v.size() != scenario.dim()) {
      throw InvalidArgument("--x-hat: expected " + std::to_string(scenario.dim()) +
                            " values (N * n_x), got " + std::to_string(v.size()));
    }
    return StackedState(scenario.n_targets, scenario.state_dim,
                        Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }

  std::optional<Matrix> raw_q() const {
    if (opt.q == "identity") return std::nullopt;
    if (!doc.contains("q_matrix")) throw InvalidArgument("--q scenario: the scenario has no q_matrix");
    const std::size_t d = scenario.dim();
    Matrix q(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            doc["q_matrix"][r][c].get<double>();
      }
    }
    return q;
  }

  std::optional<QuadraticForm> q_form() const {
    const auto q = raw_q();
    if (!q) return std::nullopt;
    return QuadraticForm::from_matrix(*q, scenario.n_targets, scenario.state_dim);
  }

  std::optional<std::vector<double>> site_weights() const {
    if (opt.weights.empty()) return std::nullopt;
    return parse_list(opt.weights, "--weights");
  }

  EmpiricalMeasure draw() const { return gm_sample(scenario.mixture, seed(), samples); }
};

class CsvWriter {
 public:
  CsvWriter(const Context& ctx, const std::vector<std::string>& header,
            const std::vector<std::pair<std::string, std::string>>& meta = {}) {
    out_ << "# subcommand=" << ctx.subcommand << '\n';
    out_ << "# scenario_digest=" << ctx.digest << '\n';
    out_ << "# seed=" << ctx.seed() << '\n';
    for (const auto& [k, v] : meta) out_ << "# " << k << '=' << v << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void save(const std::filesystem::path& path) const { write_file(path, out_.str()); }

  static void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file " + path.string());
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
  }

 private:
  std::ostringstream out_;
};

std::string fmt(double x) { return format_real(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }

std::string perm_text(const Permutation& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + std::to_string(p[i]);
  return s;
}

const char* status_text(EstimateStatus s) {
  return s == EstimateStatus::kOk ? "ok" : "degenerate-estimate";
}

json json_header(const Context& ctx) {
  return json{{"subcommand", ctx.subcommand}, {"scenario_digest", ctx.digest}, {"seed", ctx.seed()}};
}

void save_json(const Context& ctx, const json& payload) {
  json report = json_header(ctx);
  report["payload"] = payload;
  std::filesystem::path path(ctx.opt.output);
  path.replace_extension(".json");
  CsvWriter::write_file(path, report.dump(2) + "\n");
}

int per_sample_distances(const Context& ctx, const std::optional<QuadraticForm>& q) {
  const StackedState x_hat = ctx.x_hat();
  const EmpiricalMeasure samples = ctx.draw();
  Aligner aligner(x_hat, q);
  std::vector<std::size_t> mapping(x_hat.n_targets());
  CsvWriter csv(ctx, {"index", "value", "region"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = aligner.align(samples.column(i), mapping);
    csv.row({fmt(i), fmt(d), fmt(aligner.rank(mapping))});
  }
  csv.save(ctx.opt.output);
  return kExitOk;
}

int cmd_ospa(const Context& ctx, std::ostream&) { return per_sample_distances(ctx, std::nullopt); }

int cmd_gospa(const Context& ctx, std::ostream&) {
  auto q = ctx.q_form();
  if (!q) q = QuadraticForm::identity(ctx.scenario.n_targets, ctx.scenario.state_dim);
  return per_sample_distances(ctx, q);
}

int cmd_mospa(const Context& ctx, std::ostream& log) {
  const StackedState x_hat = ctx.x_hat();
  const auto q = ctx.q_form();
  const EmpiricalMeasure samples = ctx.draw();
  const MospaEstimate est = mospa_mc(samples, x_hat, q);
  const double mse = empirical_mse(samples, x_hat, q);
  CsvWriter csv(ctx, {"mospa", "std_error", "mse", "sample_count"});
  csv.row({fmt(est.value), fmt(est.std_error), fmt(mse), fmt(est.sample_count)});
  csv.save(ctx.opt.output);
  log << "mospa = " << est.value << " +/- " << est.std_error << " (mse " << mse << ")\n";
  return kExitOk;
}

int cmd_mmospa(const Context& ctx, std::ostream& log) {
  const EmpiricalMeasure samples = ctx.draw();
  MmospaConfig config;
  config.seed = ctx.seed();
  std::optional<StackedState> init;
  if (!ctx.opt.x_hat.empty()) init = ctx.x_hat();
  const MmospaResult r = mmospa_estimate(samples, init, config, ctx.q_form());
  std::vector<std::string> header{"target"};
  for (std::size_t k = 0; k < ctx.scenario.state_dim; ++k) header.push_back("x" + std::to_string(k));
  CsvWriter csv(ctx, header,
                {{"empirical_mospa", fmt(r.empirical_mospa)},
                 {"iterations", fmt(r.iterations)},
                 {"restarts", fmt(r.restarts_used)},
                 {"converged", r.converged ? "true" : "false"}});
  for (std::size_t t = 0; t < r.estimate.n_targets(); ++t) {
    std::vector<std::string> cells{fmt(t)};
    for (double v : r.estimate.block(t)) cells.push_back(fmt(v));
    csv.row(cells);
  }
  csv.save(ctx.opt.output);
  log << "mmospa: empirical mospa " << r.empirical_mospa << " after " << r.iterations
      << " iterations\n";
  return kExitOk;
}

int cmd_masses(const Context& ctx, std::ostream&) {
  const StackedState x_hat = ctx.x_hat();
  const RegionMasses m = estimate_region_masses(ctx.draw(), x_hat, ctx.q_form());
  const auto perms = permutation_enumerate(x_hat.n_targets());
  CsvWriter csv(ctx, {"rank", "permutation", "mass"}, {{"status", status_text(m.status)}});
  for (std::size_t k = 0; k < perms.size(); ++k) {
    csv.row({fmt(k), perm_text(perms[k]), fmt(m.masses[k])});
  }
  csv.save(ctx.opt.output);
  return kExitOk;
}

int cmd_wasserstein(const Context& ctx, std::ostream& log) {
  const StackedState x_hat = ctx.x_hat();
  const auto q = ctx.q_form();
  const EmpiricalMeasure samples = ctx.draw();
  const RegionMasses m = estimate_region_masses(samples, x_hat, q);
  const DiscreteMeasure nu = build_nu(x_hat, m.masses);
  const TransportSolution sol = solve_transport(samples, nu, q);
  CsvWriter csv(ctx, {"w2_squared", "pivots", "sample_count"});
  csv.row({fmt(sol.cost), fmt(sol.pivots), fmt(samples.size())});
  csv.save(ctx.opt.output);
  log << "w2_squared = " << sol.cost << '\n';
  return kExitOk;
}

int cmd_verify(const Context& ctx, std::ostream& log) {
  VerifyMode mode;
  if (ctx.opt.mode == "same-sample") {
    mode = VerifyMode::kSameSample;
  } else if (ctx.opt.mode == "independent") {
    mode = VerifyMode::kIndependent;
  } else {
    throw InvalidArgument("--mode must be same-sample or independent");
  }
  const TheoremOneReport r =
      verify_theorem1(ctx.scenario, ctx.x_hat(), mode, ctx.samples, ctx.q_form());
  CsvWriter csv(ctx, {"mospa_value", "w2_squared", "abs_diff", "rel_diff", "mode", "tolerance",
                      "passed", "sample_count"});
  csv.row({fmt(r.mospa_value), fmt(r.w2_squared), fmt(r.abs_diff), fmt(r.rel_diff),
           to_string(r.mode), fmt(r.tolerance), r.passed ? "true" : "false", fmt(r.sample_count)});
  csv.save(ctx.opt.output);
  save_json(ctx, json{{"mospa_value", r.mospa_value},
                      {"w2_squared", r.w2_squared},
                      {"abs_diff", r.abs_diff},
                      {"rel_diff", r.rel_diff},
                      {"mode", to_string(r.mode)},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed},
                      {"sample_count", r.sample_count},
                      {"mospa_std_error", r.mospa_std_error},
                      {"w2_std_error", r.w2_std_error},
                      {"masses", r.masses},
                      {"support_size", r.support_size},
                      {"pivots", r.pivots},
                      {"status", status_text(r.status)}});
  log << "verify (" << to_string(r.mode) << "): mospa " << r.mospa_value << ", w2^2 "
      << r.w2_squared << ", |diff| " << r.abs_diff << " vs tolerance " << r.tolerance << " -> "
      << (r.passed ? "passed" : "FAILED") << '\n';
  return r.passed ? kExitOk : kExitVerification;
}

int cmd_prop1(const Context& ctx, std::ostream& log) {
  const StackedState x_hat = ctx.x_hat();
  const auto weights = ctx.site_weights();
  const AgreementReport r = cells_match_regions(x_hat, ctx.scenario.mixture, ctx.seed(),
                                                ctx.samples, ctx.q_form(), weights);
  const bool equal_weights =
      !weights || std::adjacent_find(weights->begin(), weights->end(),
                                     std::not_equal_to<>()) == weights->end();
  CsvWriter csv(ctx, {"agreement", "compared", "excluded", "disagreements", "equal_weights"});
  csv.row({fmt(r.agreement), fmt(r.compared), fmt(r.excluded), fmt(r.disagreements),
           equal_weights ? "true" : "false"});
  csv.save(ctx.opt.output);
  save_json(ctx, json{{"agreement", r.agreement},
                      {"compared", r.compared},
                      {"excluded", r.excluded},
                      {"disagreements", r.disagreements},
                      {"equal_weights", equal_weights}});
  log << "prop1: agreement " << r.agreement << " over " << r.compared << " samples ("
      << r.excluded << " in the tie band)\n";
  return (equal_weights && r.agreement < 1.0) ? kExitVerification : kExitOk;
}

int cmd_voronoi(const Context& ctx, std::ostream&) {
  const std::vector<double> box = parse_list(ctx.opt.bbox, "--bbox");
  if (box.size() != 2) throw InvalidArgument("--bbox: expected lo,hi");
  const WeightedSites sites = WeightedSites::from_estimate(ctx.x_hat(), ctx.site_weights());
  const auto segments = export_diagram_2d(sites, ctx.raw_q(), BoundingBox::square(box[0], box[1]));
  CsvWriter csv(ctx, {"i", "j", "ax", "ay", "bx", "by"});
  for (const auto& s : segments) {
    csv.row({fmt(s.i), fmt(s.j), fmt(s.a.x()), fmt(s.a.y()), fmt(s.b.x()), fmt(s.b.y())});
  }
  csv.save(ctx.opt.output);
  return kExitOk;
}

using Handler = int (*)(const Context&, std::ostream&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
  bool needs_x_hat;
};

constexpr Command kCommands[] = {
    {"ospa", "per-sample squared OSPA against x_hat", cmd_ospa, true},
    {"gospa", "per-sample GOSPA against x_hat", cmd_gospa, true},
    {"mospa", "Monte Carlo MOSPA of x_hat", cmd_mospa, true},
    {"mmospa", "MMOSPA estimate by alternating alignment", cmd_mmospa, false},
    {"masses", "permutation-region masses of x_hat", cmd_masses, true},
    {"wasserstein", "W2^2 between the samples and the induced measure", cmd_wasserstein, true},
    {"verify", "compare MOSPA with W2^2", cmd_verify, true},
    {"prop1", "power cells versus permutation regions", cmd_prop1, true},
    {"voronoi", "planar power diagram segments", cmd_voronoi, true},
};

}  // namespace

std::string format_real(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

int run(int argc, const char* const* argv, std::ostream& log) {
  CLI::App app{"MOSPA, Wasserstein and power-diagram analyses"};
  app.require_subcommand(1);
  Options opt;
  std::map<std::string, const Command*> by_app;
  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    by_app[cmd.name] = &cmd;
    sub->add_option("--scenario", opt.scenario, "scenario JSON file")->required();
    auto* xh = sub->add_option("--x-hat", opt.x_hat, "estimate as a comma list");
    if (cmd.needs_x_hat) xh->required();
    sub->add_option("--samples", opt.samples, "Monte Carlo sample count (default: scenario)");
    sub->add_option("--seed", opt.seed, "seed override");
    sub->add_option("--q", opt.q, "identity or scenario")
        ->check(CLI::IsMember({"identity", "scenario"}));
    sub->add_option("--output", opt.output, "output CSV path")->required();
    sub->add_option("--threads", opt.threads, "worker threads (0: default)");
    if (std::string(cmd.name) == "verify") {
      sub->add_option("--mode", opt.mode, "same-sample or independent")
          ->check(CLI::IsMember({"same-sample", "independent"}));
    }
    if (std::string(cmd.name) == "prop1" || std::string(cmd.name) == "voronoi") {
      sub->add_option("--weights", opt.weights, "additive site weights, one per permutation");
    }
    if (std::string(cmd.name) == "voronoi") {
      sub->add_option("--bbox", opt.bbox, "square bounding box lo,hi");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, log);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Command* cmd = by_app.at(app.get_subcommands().front()->get_name());
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (opt.threads > 0) parallel::set_thread_count(opt.threads);
    json doc = read_json(opt.scenario);
    Scenario scenario = scenario_from_json(doc);
    if (opt.seed) scenario.seed = *opt.seed;
    const std::size_t samples = opt.samples > 0 ? opt.samples : scenario.sample_count;
    const std::string digest = scenario_digest(doc);
    const Context ctx{opt, cmd->name, std::move(doc), digest, std::move(scenario), samples};
    code = cmd->handler(ctx, log);
  } catch (const ScenarioError& e) {
    log << "error: invalid scenario: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  log << cmd->name << ": " << ms.count() << " ms\n";
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& log) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), log);
}

}  // namespace mospa::cli
