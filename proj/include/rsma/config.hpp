#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsma/isac.hpp"
#include "rsma/montecarlo.hpp"

namespace rsma {

enum class ExperimentKind { BinnedGains, PercentileGains, PairCases, Overloaded, Isac };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(PrivateKind kind);
std::string_view to_string(CommonKind kind);
std::string_view to_string(AllocationPolicy policy);

/// Flat run configuration. Read from `key = value` lines with `#` comments;
/// list values are comma separated.
struct SimConfig {
  ExperimentKind experiment = ExperimentKind::BinnedGains;
  std::uint64_t seed = 1;
  long long n_drops = 10000;  // slots for the overloaded experiment, drops per case for pair_cases
  Index n_tx = 2;
  Index n_users = 2;
  double snr_db = 20.0;
  PrivateKind precoder = PrivateKind::MMSE;
  CommonKind common_precoder = CommonKind::MaxMin;
  AllocationPolicy allocation_policy = AllocationPolicy::MaxMin;
  int power_grid_points = 101;
  std::vector<double> rho_edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> alpha_edges{-20.0, -10.0, 0.0};
  std::optional<IsacOption> isac_option;
  std::optional<ScenarioTag> isac_scenario;  // all three scenarios when absent
  std::string output_path;

  unsigned workers = 0;
  int isac_grid_points = 41;
  std::optional<double> forced_pair_rho_max;

  bool operator==(const SimConfig&) const = default;
};

/// Parses and validates a configuration document. `overrides` are applied as
/// if they were extra lines of the document (command-line flags).
SimConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides = {});

/// Canonical document listing every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);

ExperimentConfig to_experiment_config(const SimConfig& cfg);

}  // namespace rsma
