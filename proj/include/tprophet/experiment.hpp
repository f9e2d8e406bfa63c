#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tprophet/analysis.hpp"
#include "tprophet/engine.hpp"
#include "tprophet/market.hpp"
#include "tprophet/traders.hpp"

namespace tprophet {

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitBoundViolated = 1;
inline constexpr int kExitConfigError = 2;

/// Invalid experiment configuration; `field` names the offending setting.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct InstanceSpec {
  /// prop-adv | prop-iid | appendix-fail | phase | dist | process
  std::string name = "prop-iid";
  double eps = 0.1;
  std::size_t horizon = 100;
  std::size_t phases = 1000;
  std::size_t k = 1;
  /// Distribution file or built-in name (dist), or process file (process).
  std::string path;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

struct TraderSpec {
  /// blsh | bbsa | eps-margin | lookahead:<k> | lookahead:<k>:blsh
  std::string name = "blsh";
  /// Margin for eps-margin; negative means "use eps_sigma".
  double margin = -1.0;

  friend bool operator==(const TraderSpec&, const TraderSpec&) = default;
};

struct ExperimentConfig {
  InstanceSpec instance;
  TraderSpec trader;
  CostModel costs;
  /// Horizon grid for ratio fits; empty unless requested.
  std::vector<std::size_t> horizons;
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format = "csv";
  unsigned workers = 0;

  /// verify: theorem1 | theorem2 | lowerbound | appendix
  std::string target;
  /// lowerbound: adversarial | iid; appendix: phase | eps-margin | all
  std::string which;
  std::size_t random_instances = 1000;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string config_to_json(const ExperimentConfig& cfg);
/// Throws ConfigError on malformed input.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Built-in name ("uniform01") or a JSON file {"atoms": [[v,p],...], "delta": d}.
PriceDistribution load_distribution(const std::string& name_or_path);
PriceDistribution distribution_from_json(const std::string& text);

/// JSON process spec: {"variant": "iid"|"independent"|"deterministic"|"generator", ...}.
PriceProcess process_from_json(const std::string& text);

/// Checks parameter ranges and required fields. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

PriceProcess build_process(const ExperimentConfig& cfg);
/// Throws ConfigError when the trader cannot run on the process (e.g. BBSA
/// on a non-i.i.d. process or a discontinuous distribution).
TraderFactory build_trader_factory(const ExperimentConfig& cfg, const PriceProcess& process);

// Random instance generators shared by the sweeps.
PriceDistribution random_distribution(Rng& rng, std::size_t max_atoms, double max_value,
                                      bool allow_perturbation);
PriceProcess random_independent_process(Rng& rng, std::size_t max_horizon, std::size_t max_atoms);
PriceProcess random_iid_process(Rng& rng, std::size_t max_horizon, std::size_t max_atoms);

/// Commands. Each writes its report to `out`, diagnostics to `err`, and
/// returns the process exit code.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_thresholds(const std::string& dist, const CostModel& cm, std::ostream& out,
                   std::ostream& err);

}  // namespace tprophet
