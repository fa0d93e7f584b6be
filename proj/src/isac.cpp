#include "rsma/isac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rsma/rates.hpp"

namespace rsma {

ScenarioTag parse_scenario_tag(std::string_view tag) {
  if (tag == "s1" || tag == "S1") return ScenarioTag::S1;
  if (tag == "s2" || tag == "S2") return ScenarioTag::S2;
  if (tag == "s3" || tag == "S3") return ScenarioTag::S3;
  throw ConfigurationError("unknown ISAC scenario '" + std::string(tag) + "' (expected s1, s2 or s3)");
}

std::string_view to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::S1:
      return "s1";
    case ScenarioTag::S2:
      return "s2";
    case ScenarioTag::S3:
      return "s3";
  }
  return "?";
}

void IsacScenario::validate() const {
  auto in_range = [](double a) { return a > -90.0 && a < 90.0; };
  if (n_tx < 2) {
    throw ConfigurationError("IsacScenario: n_tx must be >= 2");
  }
  if (user_angles.empty() || !std::all_of(user_angles.begin(), user_angles.end(), in_range) ||
      !in_range(target_angle)) {
    throw ConfigurationError("IsacScenario: angles must lie in (-90, 90) degrees");
  }
}

CVector steering_vector(double angle_deg, Index n_tx, double spacing) {
  if (!(angle_deg > -90.0 && angle_deg < 90.0)) {
    throw ConfigurationError("steering_vector: angle must lie in (-90, 90) degrees");
  }
  const double phase_step = 2.0 * std::numbers::pi * spacing * std::sin(angle_deg * std::numbers::pi / 180.0);
  CVector a(n_tx);
  for (Index n = 0; n < n_tx; ++n) {
    a(n) = std::polar(1.0, phase_step * static_cast<double>(n));
  }
  return a / std::sqrt(static_cast<double>(n_tx));
}

double radar_snr(const PrecoderSet& pre, const CVector& target) {
  if (!(pre.total_power() > 0.0)) {
    throw UndefinedMetricError("radar_snr: no stream carries power");
  }
  double gain = 0.0;
  if (pre.common) {
    gain += pre.power_common * std::norm(target.dot(*pre.common));
  }
  gain += (pre.private_beams.adjoint() * target).cwiseAbs2().dot(pre.power_private);
  if (pre.sensing) {
    gain += pre.power_sensing * std::norm(target.dot(*pre.sensing));
  }
  if (!(gain > 1e-30)) {
    return kRadarFloorDb;
  }
  return 10.0 * std::log10(gain);
}

ChannelSet scenario_channels(const IsacScenario& scn) {
  scn.validate();
  const Index K = static_cast<Index>(scn.user_angles.size());
  CMatrix H(scn.n_tx, K);
  for (Index k = 0; k < K; ++k) {
    H.col(k) = steering_vector(scn.user_angles[static_cast<std::size_t>(k)], scn.n_tx, scn.element_spacing);
  }
  return make_channel_set(std::move(H), noise_variance_for_snr(scn.snr_db, 1.0), 1.0);
}

std::vector<IsacScenario> default_scenarios(Index n_tx) {
  return {
      IsacScenario{n_tx, 0.5, {-50.0, 50.0}, 0.0, 20.0, ScenarioTag::S1},
      IsacScenario{n_tx, 0.5, {-10.0, 10.0}, 60.0, 20.0, ScenarioTag::S2},
      IsacScenario{n_tx, 0.5, {-10.0, 10.0}, 0.0, 20.0, ScenarioTag::S3},
  };
}

std::vector<ParetoPoint> sweep_points(const IsacScenario& scn, IsacOption option, const PrecoderChoice& kinds,
                                      const SweepGrid& grid) {
  if (grid.mu_points < 2 || (uses_common_stream(option) && grid.split_points < 2)) {
    throw ConfigurationError("pareto sweep grids need at least 2 points per parameter");
  }
  const ChannelSet ch = scenario_channels(scn);
  const CVector target = steering_vector(scn.target_angle, scn.n_tx, scn.element_spacing);
  const bool rsma = uses_common_stream(option);
  const int n_split = rsma ? grid.split_points : 1;

  std::vector<ParetoPoint> points;
  points.reserve(static_cast<std::size_t>(grid.mu_points * n_split));
  for (int i = 0; i < grid.mu_points; ++i) {
    const double mu = static_cast<double>(i) / (grid.mu_points - 1);
    for (int j = 0; j < n_split; ++j) {
      const double t = rsma ? static_cast<double>(j) / (n_split - 1) : 0.0;
      const PrecoderSet pre = isac_mixed_precoders(ch, target, mu, option, kinds, t);
      const RateReport rep = rsma ? rsma_rates(ch, pre) : sdma_rates(ch, pre);
      points.push_back(ParetoPoint{rep.sum_rate, radar_snr(pre, target), mu, t, false});
    }
  }

  const std::vector<ParetoPoint> front = pareto_front(points);
  for (auto& p : points) {
    p.on_envelope = std::any_of(front.begin(), front.end(), [&](const ParetoPoint& f) {
      return f.mu == p.mu && f.common_fraction == p.common_fraction;
    });
  }
  return points;
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
  std::vector<ParetoPoint> sorted = points;
  // Radar SNR descending, then throughput descending: a point survives iff it
  // beats the best throughput seen among points with at least its radar SNR.
  std::stable_sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.radar_snr_db != b.radar_snr_db) return a.radar_snr_db > b.radar_snr_db;
    return a.throughput > b.throughput;
  });
  std::vector<ParetoPoint> front;
  double best_throughput = -std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (p.throughput > best_throughput) {
      best_throughput = p.throughput;
      front.push_back(p);
      front.back().on_envelope = true;
    }
  }
  std::reverse(front.begin(), front.end());
  return front;
}

std::vector<ParetoPoint> pareto_sweep(const IsacScenario& scn, IsacOption option, const PrecoderChoice& kinds,
                                      const SweepGrid& grid) {
  return pareto_front(sweep_points(scn, option, kinds, grid));
}

double envelope_throughput_at(const std::vector<ParetoPoint>& front, double radar_snr_db) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : front) {
    if (p.radar_snr_db >= radar_snr_db) {
      best = std::max(best, p.throughput);
    }
  }
  return best;
}

bool envelope_dominates(const std::vector<ParetoPoint>& upper, const std::vector<ParetoPoint>& lower, double tol) {
  return std::all_of(lower.begin(), lower.end(), [&](const ParetoPoint& l) {
    return std::any_of(upper.begin(), upper.end(), [&](const ParetoPoint& u) {
      return u.radar_snr_db >= l.radar_snr_db - tol && u.throughput >= l.throughput - tol;
    });
  });
}

}  // namespace rsma
