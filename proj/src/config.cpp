#include "rsma/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace rsma {

namespace {

constexpr std::array<std::string_view, 18> kKeys = {
    "experiment",  "seed",        "n_drops",      "n_tx",          "n_users",           "snr_db",
    "precoder",    "common_precoder", "allocation_policy", "power_grid_points", "rho_edges", "alpha_edges",
    "isac_option", "isac_scenario", "output_path", "workers",       "isac_grid_points",  "forced_pair_rho_max",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigurationError(msg); }

template <typename Int>
Int parse_integer(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(fmt::format("{}: expected an integer, got '{}'", key, value));
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    fail(fmt::format("{}: expected a finite number, got '{}'", key, value));
  }
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(parse_real(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) {
      break;
    }
    value.remove_prefix(comma + 1);
  }
  return out;
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view key, std::string_view value, const std::array<Enum, N>& options) {
  for (Enum e : options) {
    if (to_string(e) == value) {
      return e;
    }
  }
  std::vector<std::string_view> names;
  for (Enum e : options) {
    names.push_back(to_string(e));
  }
  fail(fmt::format("{}: unknown value '{}' (expected one of {})", key, value, fmt::join(names, ", ")));
}

template <typename T>
void require_at_least(std::string_view key, T value, T bound) {
  if (value < bound) {
    fail(fmt::format("{} must be >= {} (got {})", key, bound, value));
  }
}

using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues read_document(std::string_view text) {
  KeyValues kv;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      fail(fmt::format("unknown key '{}'", key));
    }
    if (!kv.emplace(key, value).second) {
      fail(fmt::format("duplicate key '{}'", key));
    }
  }
  return kv;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BinnedGains:
      return "binned_gains";
    case ExperimentKind::PercentileGains:
      return "percentile_gains";
    case ExperimentKind::PairCases:
      return "pair_cases";
    case ExperimentKind::Overloaded:
      return "overloaded";
    case ExperimentKind::Isac:
      return "isac";
  }
  return "?";
}

std::string_view to_string(PrivateKind kind) {
  switch (kind) {
    case PrivateKind::ZF:
      return "zf";
    case PrivateKind::MRT:
      return "mrt";
    case PrivateKind::MMSE:
      return "mmse";
  }
  return "?";
}

std::string_view to_string(CommonKind kind) { return kind == CommonKind::SV ? "sv" : "maxmin"; }

std::string_view to_string(AllocationPolicy policy) {
  switch (policy) {
    case AllocationPolicy::MaxMin:
      return "maxmin";
    case AllocationPolicy::AllToWeakest:
      return "all_to_weakest";
    case AllocationPolicy::EqualSplit:
      return "equal";
  }
  return "?";
}

SimConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
  KeyValues kv = read_document(text);
  for (const auto& [key, value] : overrides) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      fail(fmt::format("unknown key '{}'", key));
    }
    kv[key] = value;
  }
  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto require = [&](std::string_view key) -> const std::string& {
    const std::string* v = get(key);
    if (!v || v->empty()) {
      fail(fmt::format("missing required key '{}'", key));
    }
    return *v;
  };

  SimConfig cfg;
  cfg.experiment = parse_enum(
      "experiment", require("experiment"),
      std::array{ExperimentKind::BinnedGains, ExperimentKind::PercentileGains, ExperimentKind::PairCases,
                 ExperimentKind::Overloaded, ExperimentKind::Isac});
  const bool isac = cfg.experiment == ExperimentKind::Isac;
  if (cfg.experiment == ExperimentKind::Overloaded) {
    cfg.n_users = 4;
  }
  cfg.output_path = require("output_path");

  if (auto v = get("seed")) cfg.seed = parse_integer<std::uint64_t>("seed", *v);
  if (auto v = get("n_drops")) cfg.n_drops = parse_integer<long long>("n_drops", *v);
  if (auto v = get("n_tx")) cfg.n_tx = parse_integer<Index>("n_tx", *v);
  if (auto v = get("n_users")) cfg.n_users = parse_integer<Index>("n_users", *v);
  if (auto v = get("snr_db")) cfg.snr_db = parse_real("snr_db", *v);
  if (auto v = get("precoder")) {
    cfg.precoder = parse_enum("precoder", *v, std::array{PrivateKind::ZF, PrivateKind::MRT, PrivateKind::MMSE});
  }
  cfg.common_precoder = cfg.n_users <= 2 ? CommonKind::MaxMin : CommonKind::SV;
  if (auto v = get("common_precoder")) {
    cfg.common_precoder = parse_enum("common_precoder", *v, std::array{CommonKind::SV, CommonKind::MaxMin});
  }
  if (auto v = get("allocation_policy")) {
    cfg.allocation_policy =
        parse_enum("allocation_policy", *v,
                   std::array{AllocationPolicy::MaxMin, AllocationPolicy::AllToWeakest, AllocationPolicy::EqualSplit});
  }
  if (auto v = get("power_grid_points")) cfg.power_grid_points = parse_integer<int>("power_grid_points", *v);
  if (auto v = get("rho_edges")) cfg.rho_edges = parse_list("rho_edges", *v);
  if (auto v = get("alpha_edges")) cfg.alpha_edges = parse_list("alpha_edges", *v);
  if (auto v = get("workers")) cfg.workers = parse_integer<unsigned>("workers", *v);
  if (auto v = get("isac_grid_points")) cfg.isac_grid_points = parse_integer<int>("isac_grid_points", *v);
  if (auto v = get("forced_pair_rho_max")) cfg.forced_pair_rho_max = parse_real("forced_pair_rho_max", *v);

  if (isac) {
    cfg.isac_option = parse_isac_option(require("isac_option"));
    if (auto v = get("isac_scenario")) cfg.isac_scenario = parse_scenario_tag(*v);
  } else {
    for (std::string_view key : {"isac_option", "isac_scenario"}) {
      if (get(key)) {
        fail(fmt::format("{} is only valid with experiment = isac", key));
      }
    }
  }

  require_at_least<long long>("n_drops", cfg.n_drops, 1);
  require_at_least<Index>("n_tx", cfg.n_tx, 1);
  require_at_least<Index>("n_users", cfg.n_users, 1);
  require_at_least("power_grid_points", cfg.power_grid_points, 2);
  require_at_least("isac_grid_points", cfg.isac_grid_points, 2);
  if (cfg.forced_pair_rho_max && !(*cfg.forced_pair_rho_max >= 0.0 && *cfg.forced_pair_rho_max <= 1.0)) {
    fail(fmt::format("forced_pair_rho_max must lie in [0, 1] (got {})", *cfg.forced_pair_rho_max));
  }
  if (cfg.common_precoder == CommonKind::MaxMin && cfg.n_users > 2) {
    fail(fmt::format("common_precoder = maxmin needs n_users <= 2 (got {})", cfg.n_users));
  }
  if (cfg.precoder == PrivateKind::ZF && cfg.n_users > cfg.n_tx && cfg.experiment != ExperimentKind::Overloaded) {
    fail(fmt::format("precoder = zf needs n_users <= n_tx (got {} > {})", cfg.n_users, cfg.n_tx));
  }

  switch (cfg.experiment) {
    case ExperimentKind::BinnedGains:
    case ExperimentKind::PairCases:
    case ExperimentKind::Isac:
      if (cfg.n_users != 2) {
        fail(fmt::format("n_users must be 2 for {} (got {})", to_string(cfg.experiment), cfg.n_users));
      }
      require_at_least<Index>("n_tx", cfg.n_tx, 2);
      break;
    case ExperimentKind::PercentileGains:
      if (cfg.n_users != 2 && cfg.n_users != 4) {
        fail(fmt::format("n_users must be 2 or 4 for percentile_gains (got {})", cfg.n_users));
      }
      require_at_least<long long>("n_drops", cfg.n_drops, 100);
      if (cfg.forced_pair_rho_max) {
        require_at_least<Index>("n_tx", cfg.n_tx, 2);
      }
      break;
    case ExperimentKind::Overloaded:
      if (cfg.n_tx != 2) {
        fail(fmt::format("n_tx must be 2 for overloaded (got {})", cfg.n_tx));
      }
      if (cfg.n_users != 4) {
        fail(fmt::format("n_users must be 4 for overloaded (got {})", cfg.n_users));
      }
      break;
  }
  if (cfg.experiment == ExperimentKind::BinnedGains) {
    validate_edges(cfg.rho_edges, cfg.alpha_edges);
  }
  return cfg;
}

std::string serialize_config(const SimConfig& cfg) {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  line("experiment", to_string(cfg.experiment));
  line("seed", cfg.seed);
  line("n_drops", cfg.n_drops);
  line("n_tx", cfg.n_tx);
  line("n_users", cfg.n_users);
  line("snr_db", cfg.snr_db);
  line("precoder", to_string(cfg.precoder));
  line("common_precoder", to_string(cfg.common_precoder));
  line("allocation_policy", to_string(cfg.allocation_policy));
  line("power_grid_points", cfg.power_grid_points);
  line("rho_edges", fmt::format("{}", fmt::join(cfg.rho_edges, ",")));
  line("alpha_edges", fmt::format("{}", fmt::join(cfg.alpha_edges, ",")));
  if (cfg.isac_option) line("isac_option", to_string(*cfg.isac_option));
  if (cfg.isac_scenario) line("isac_scenario", to_string(*cfg.isac_scenario));
  line("output_path", cfg.output_path);
  line("workers", cfg.workers);
  line("isac_grid_points", cfg.isac_grid_points);
  if (cfg.forced_pair_rho_max) line("forced_pair_rho_max", *cfg.forced_pair_rho_max);
  return out;
}

ExperimentConfig to_experiment_config(const SimConfig& cfg) {
  ExperimentConfig e;
  e.kinds = PrecoderChoice{cfg.precoder, cfg.common_precoder};
  e.policy = cfg.allocation_policy;
  e.power_grid_points = cfg.power_grid_points;
  e.n_tx = cfg.n_tx;
  e.snr_db = cfg.snr_db;
  e.rho_edges = cfg.rho_edges;
  e.alpha_edges = cfg.alpha_edges;
  e.forced_pair_rho_max = cfg.forced_pair_rho_max;
  e.workers = cfg.workers;
  return e;
}

}  // namespace rsma
