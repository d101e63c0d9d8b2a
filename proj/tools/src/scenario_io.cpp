#include "mospa_cli/scenario_io.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace mospa::cli {
namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ScenarioError(path, "missing field");
  return obj.at(key);
}

std::size_t as_count(const json& v, const std::string& path, bool allow_zero = false) {
  if (!v.is_number_integer() || v.get<long long>() < (allow_zero ? 0 : 1)) {
    throw ScenarioError(path, allow_zero ? "expected a nonnegative integer"
                                         : "expected a positive integer");
  }
  return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ScenarioError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(path, "not finite");
  return x;
}

Vector as_vector(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array()) throw ScenarioError(path, "expected an array");
  if (v.size() != n) {
    throw ScenarioError(path, "expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(v.size()));
  }
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out[static_cast<Eigen::Index>(i)] = as_real(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix as_matrix(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array() || v.size() != n) {
    throw ScenarioError(path, "expected " + std::to_string(n) + " rows");
  }
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        as_vector(v[r], n, path + "[" + std::to_string(r) + "]").transpose();
  }
  return out;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("$", "expected a JSON object");
  const std::size_t n = as_count(require(doc, "n_targets", "n_targets"), "n_targets");
  const std::size_t nx = as_count(require(doc, "state_dim", "state_dim"), "state_dim");
  const std::size_t dim = n * nx;
  const auto seed = doc.contains("seed") ? as_count(doc.at("seed"), "seed", true) : 0;
  const std::size_t sample_count =
      doc.contains("sample_count") ? as_count(doc.at("sample_count"), "sample_count") : 1000;

  const json& mix = require(doc, "mixture", "mixture");
  if (!mix.is_array() || mix.empty()) {
    throw ScenarioError("mixture", "expected a non-empty array of components");
  }
  std::vector<GaussianComponent> components;
  double total = 0.0;
  for (std::size_t k = 0; k < mix.size(); ++k) {
    const std::string base = "mixture[" + std::to_string(k) + "]";
    const double w = as_real(require(mix[k], "weight", base + ".weight"), base + ".weight");
    if (!(w > 0.0 && w <= 1.0)) {
      throw ScenarioError("mixture.weights", "weight " + std::to_string(k) + " = " +
                                                 std::to_string(w) + " is outside (0, 1]");
    }
    total += w;
    components.push_back(
        GaussianComponent{w, as_vector(require(mix[k], "mean", base + ".mean"), dim, base + ".mean"),
                          as_matrix(require(mix[k], "cov", base + ".cov"), dim, base + ".cov")});
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ScenarioError("mixture.weights", "weights sum to " + std::to_string(total) + ", not 1");
  }

  std::optional<GaussianMixtureMeasure> mixture;
  try {
    mixture.emplace(n, nx, std::move(components));
  } catch (const Error& e) {
    std::string what = e.what();
    std::string field = "mixture";
    // Component errors name their index; point the path at its covariance.
    if (const auto pos = what.find("component "); pos != std::string::npos) {
      std::size_t k = 0;
      if (std::sscanf(what.c_str() + pos, "component %zu", &k) == 1) {
        field = "mixture[" + std::to_string(k) + "].cov";
      }
    }
    throw ScenarioError(field, what);
  }

  std::optional<QuadraticForm> q;
  if (doc.contains("q_matrix")) {
    const Matrix qm = as_matrix(doc.at("q_matrix"), dim, "q_matrix");
    try {
      q = QuadraticForm::from_matrix(qm, n, nx);
    } catch (const UnsupportedMetric&) {
      // Valid for the planar diagram only; metric subcommands reject it on use.
    } catch (const Error& e) {
      throw ScenarioError("q_matrix", e.what());
    }
  }
  return Scenario{n, nx, std::move(*mixture), std::move(q), seed, sample_count};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

Scenario parse_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json(path));
}

std::string scenario_digest(const json& doc) {
  const std::string canonical = doc.dump();
  unsigned char hash[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(canonical.data()), canonical.size(), hash);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : hash) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

}  // namespace mospa::cli
