#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mospa/error.hpp"
#include "mospa/scenario.hpp"

namespace mospa::cli {

/// Scenario file rejected; `field()` is the JSON path of the offending entry.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Builds and validates a Scenario from its JSON form:
/// {n_targets, state_dim, seed, sample_count,
///  mixture: [{weight, mean: [...], cov: [[...]]}], q_matrix?: [[...]]}
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario parse_scenario(const std::filesystem::path& path);

/// Hex SHA-256 of the canonical (sorted-key, compact) serialization.
std::string scenario_digest(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace mospa::cli
