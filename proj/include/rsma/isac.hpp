#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rsma/precoding.hpp"

namespace rsma {

enum class ScenarioTag { S1, S2, S3 };

ScenarioTag parse_scenario_tag(std::string_view tag);
std::string_view to_string(ScenarioTag tag);

/// Line-of-sight geometry for a joint sensing/communication transmitter with a
/// uniform linear array. Angles in degrees from broadside.
struct IsacScenario {
  Index n_tx = 2;
  double element_spacing = 0.5;  // wavelengths
  std::vector<double> user_angles;
  double target_angle = 0.0;
  double snr_db = 20.0;
  ScenarioTag tag = ScenarioTag::S1;

  void validate() const;
};

/// Throughput / radar-SNR pair of one swept configuration.
struct ParetoPoint {
  double throughput = 0.0;    // sum rate, bit/s/Hz
  double radar_snr_db = 0.0;  // beampattern gain towards the target
  double mu = 1.0;
  double common_fraction = 0.0;
  bool on_envelope = false;
};

inline constexpr double kRadarFloorDb = -300.0;

/// ULA response exp(j 2 pi d n sin(theta)), n = 0..n_tx-1, scaled to unit norm.
CVector steering_vector(double angle_deg, Index n_tx, double spacing = 0.5);

/// 10 log10(a^H R_x a) with R_x = sum over powered streams of P_s p_s p_s^H.
/// Zero gain is floored at kRadarFloorDb; zero total power is an error.
double radar_snr(const PrecoderSet& pre, const CVector& target);

/// Users at unit-norm steering vectors, noise set from snr_db at unit power.
ChannelSet scenario_channels(const IsacScenario& scn);

/// S1 separated users (+-50 deg) and target at 0 deg; S2 close users (+-10 deg)
/// with the target at 60 deg; S3 close users with the target between them.
std::vector<IsacScenario> default_scenarios(Index n_tx = 2);

struct SweepGrid {
  int mu_points = 41;
  int split_points = 41;  // common-power fraction, RSMA options only
};

/// Every swept (mu, common fraction) point, in sweep order, with on_envelope marked.
std::vector<ParetoPoint> sweep_points(const IsacScenario& scn, IsacOption option, const PrecoderChoice& kinds,
                                      const SweepGrid& grid = {});

/// Non-dominated subset (maximising both coordinates), radar SNR ascending.
/// Exact duplicates are kept once.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

std::vector<ParetoPoint> pareto_sweep(const IsacScenario& scn, IsacOption option, const PrecoderChoice& kinds,
                                      const SweepGrid& grid = {});

/// Best envelope throughput at radar SNR >= radar_snr_db, or -inf if the
/// envelope never reaches that radar SNR.
double envelope_throughput_at(const std::vector<ParetoPoint>& front, double radar_snr_db);

/// True when every point of `lower` is matched by some point of `upper` with
/// at least its radar SNR and throughput, up to `tol`.
bool envelope_dominates(const std::vector<ParetoPoint>& upper, const std::vector<ParetoPoint>& lower,
                        double tol = 1e-9);

}  // namespace rsma
