#ifndef RSCEV_CONFIG_HPP
#define RSCEV_CONFIG_HPP

// JSON run configuration: one model block, exactly one task, optional output.
// States are 1-based in the file.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rscev/model.hpp"

namespace rscev {

struct ModelConfig {
  std::string branch = "low";
  double alpha = 1.0;
  std::vector<double> kappa;
  std::vector<double> theta;
  std::vector<double> sigma;
  std::vector<std::vector<double>> Q;

  bool operator==(const ModelConfig&) const = default;

  /// Validated model; throws rscev::Error on any violated assumption.
  RegimeModeld build() const;
};

struct SimulationBlock {
  double h = 1e-3;
  std::size_t paths = 100000;
  std::uint64_t seed = 0;
  double floor_eps = 1e-10;
  unsigned threads = 0;

  bool operator==(const SimulationBlock&) const = default;
};

struct MomentTask {
  int n = 1;
  std::vector<double> tau;
  std::vector<double> R;
  std::vector<int> states;  // empty: all states

  bool operator==(const MomentTask&) const = default;
};

struct SimulateTask {
  double h = 1e-3;
  double T = 1.0;
  double initial_R = 1.0;
  int initial_state = 1;
  std::uint64_t seed = 0;
  double floor_eps = 1e-10;

  bool operator==(const SimulateTask&) const = default;
};

struct CompareTask {
  int n = 1;
  std::vector<double> tau;
  double R = 1.0;
  int state = 1;
  SimulationBlock simulation;
  double threshold = 1.0;
  std::optional<std::string> terminal_csv;

  bool operator==(const CompareTask&) const = default;
};

struct PriceTask {
  double R = 1.0;
  int state = 1;
  double tau = 1.0;
  double rate = 0.0;
  std::vector<double> strikes;
  double a = 1.0;
  double b = 0.0;
  int J = 40;

  bool operator==(const PriceTask&) const = default;
};

using Task = std::variant<MomentTask, SimulateTask, CompareTask, PriceTask>;

std::string task_name(const Task& task);

struct RunConfig {
  ModelConfig model;
  Task task;
  std::optional<std::string> output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and checks a config; errors are ErrorCode::ConfigError with the
/// offending field path, or the model/task validation error.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace rscev

#endif  // RSCEV_CONFIG_HPP
