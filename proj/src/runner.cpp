#include "rsma/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

namespace rsma {

namespace {

// 6 significant digits for rates and percentages, 4 for dB quantities.
std::string rate(double v) { return fmt::format("{:.6g}", v); }
std::string db(double v) { return fmt::format("{:.4g}", v); }

std::string binned_csv(const SimConfig& cfg) {
  const BinGrid grid = run_binned_gains(to_experiment_config(cfg), cfg.n_drops, cfg.seed);
  std::string out;
  for (Index r = 0; r < grid.rho_bins(); ++r) {
    for (Index a = 0; a < grid.alpha_bins(); ++a) {
      const GainCell& c = grid.at(r, a);
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", rate(grid.rho_edges[r]), rate(grid.rho_edges[r + 1]),
                         db(grid.alpha_edges[a]), db(grid.alpha_edges[a + 1]), c.n, rate(c.g_w), rate(c.g_s),
                         rate(c.g_sum), c.n_excluded);
    }
  }
  return out;
}

std::string percentile_csv(const SimConfig& cfg) {
  std::string out;
  for (const auto& row : run_percentile_gains(to_experiment_config(cfg), cfg.n_users, cfg.n_drops, cfg.seed)) {
    out += fmt::format("{},{},{},{},{},{}\n", rate(row.percentile), to_string(row.metric), rate(row.sdma_value),
                       rate(row.rsma_value), rate(row.gain_pct), row.gt100 ? 1 : 0);
  }
  return out;
}

std::string pair_cases_csv(const SimConfig& cfg) {
  std::string out;
  for (const auto& row : run_pair_cases(default_pair_cases(), to_experiment_config(cfg), cfg.n_drops, cfg.seed)) {
    out += fmt::format("{},{},{},{},{},{}\n", row.case_id, rate(row.geometry.rho), db(row.geometry.alpha_db),
                       to_string(row.scheme), rate(row.user1_rate), rate(row.user2_rate));
  }
  return out;
}

std::string overloaded_csv(const SimConfig& cfg) {
  const OverloadedTrace trace = run_overloaded(to_experiment_config(cfg), cfg.n_drops, cfg.seed);
  std::string out;
  auto emit = [&](std::string_view scheme, const Eigen::MatrixXd& rates, const RVector& minimum) {
    for (Index s = 0; s < rates.rows(); ++s) {
      for (Index u = 0; u < rates.cols(); ++u) {
        out += fmt::format("{},{},{},{}\n", s, scheme, u + 1, rate(rates(s, u)));
      }
      out += fmt::format("{},{},min,{}\n", s, scheme, rate(minimum(s)));
    }
  };
  emit("sdma", trace.sdma, trace.sdma_min);
  emit("rsma", trace.rsma, trace.rsma_min);
  return out;
}

std::string isac_csv(const SimConfig& cfg) {
  std::vector<IsacScenario> scenarios = default_scenarios(cfg.n_tx);
  for (auto& s : scenarios) {
    s.snr_db = cfg.snr_db;
  }
  const PrecoderChoice kinds{cfg.precoder, cfg.common_precoder};
  const SweepGrid grid{cfg.isac_grid_points, cfg.isac_grid_points};
  std::string out;
  for (const auto& scn : scenarios) {
    if (cfg.isac_scenario && *cfg.isac_scenario != scn.tag) {
      continue;
    }
    for (const auto& p : sweep_points(scn, *cfg.isac_option, kinds, grid)) {
      out += fmt::format("{},{},{},{},{},{},{}\n", to_string(*cfg.isac_option), to_string(scn.tag), rate(p.mu),
                         rate(p.common_fraction), rate(p.throughput), db(p.radar_snr_db), p.on_envelope ? 1 : 0);
    }
  }
  return out;
}

}  // namespace

std::string_view csv_header(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BinnedGains:
      return "rho_lo,rho_hi,alpha_lo,alpha_hi,n,g_w,g_s,g_sum,n_excluded";
    case ExperimentKind::PercentileGains:
      return "percentile,metric,sdma_value,rsma_value,gain_pct,gt100_flag";
    case ExperimentKind::PairCases:
      return "case_id,rho,alpha_db,scheme,user1_rate,user2_rate";
    case ExperimentKind::Overloaded:
      return "slot,scheme,user,rate";
    case ExperimentKind::Isac:
      return "option,scenario,mu,common_fraction,throughput,radar_snr_db,on_envelope";
  }
  return "";
}

std::string render_csv(const SimConfig& cfg) {
  std::string body;
  switch (cfg.experiment) {
    case ExperimentKind::BinnedGains:
      body = binned_csv(cfg);
      break;
    case ExperimentKind::PercentileGains:
      body = percentile_csv(cfg);
      break;
    case ExperimentKind::PairCases:
      body = pair_cases_csv(cfg);
      break;
    case ExperimentKind::Overloaded:
      body = overloaded_csv(cfg);
      break;
    case ExperimentKind::Isac:
      body = isac_csv(cfg);
      break;
  }
  return std::string(csv_header(cfg.experiment)) + "\n" + body;
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    os.flush();
    if (!os) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

RunSummary run(const SimConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::string csv = render_csv(cfg);
  write_file_atomically(cfg.output_path, csv);
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  return RunSummary{std::string(to_string(cfg.experiment)), cfg.n_drops, wall.count(), cfg.output_path};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigurationError*>(&e) != nullptr) {
    return 2;
  }
  if (dynamic_cast<const IoError*>(&e) != nullptr) {
    return 4;
  }
  return 3;
}

}  // namespace rsma
