#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rsma/rates.hpp"

namespace rsma {

/// Parameters shared by the drop-level experiments.
struct ExperimentConfig {
  PrecoderChoice kinds;
  AllocationPolicy policy = AllocationPolicy::MaxMin;
  int power_grid_points = 101;
  Index n_tx = 2;
  double snr_db = 20.0;
  double tx_power = 1.0;
  std::vector<double> rho_edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> alpha_edges{-20.0, -10.0, 0.0};
  // Percentile runs only: user 2 is redrawn with rho ~ U[0, max] against user 1.
  std::optional<double> forced_pair_rho_max;
  unsigned workers = 0;  // 0 picks std::thread::hardware_concurrency()
};

/// SDMA rates below this (bit/s/Hz) make a percentage gain meaningless.
inline constexpr double kGainDenominatorFloor = 1e-6;
/// Cells with fewer drops report zero gains.
inline constexpr long long kMinDropsPerCell = 10;

struct GainCell {
  long long n = 0;
  long long n_excluded = 0;
  double g_w = 0.0;
  double g_s = 0.0;
  double g_sum = 0.0;
};

/// (rho, alpha)-binned average gains of RSMA over SDMA. rho bins are [lo, hi)
/// with the last one closed; alpha bins are (lo, hi] with the first one closed.
struct BinGrid {
  std::vector<double> rho_edges;
  std::vector<double> alpha_edges;
  std::vector<GainCell> cells;  // rho-major

  Index rho_bins() const { return static_cast<Index>(rho_edges.size()) - 1; }
  Index alpha_bins() const { return static_cast<Index>(alpha_edges.size()) - 1; }
  GainCell& at(Index rho_bin, Index alpha_bin) { return cells[static_cast<std::size_t>(rho_bin * alpha_bins() + alpha_bin)]; }
  const GainCell& at(Index rho_bin, Index alpha_bin) const {
    return cells[static_cast<std::size_t>(rho_bin * alpha_bins() + alpha_bin)];
  }
  /// (rho bin, alpha bin) of a geometry, or nullopt outside the edges.
  std::optional<std::pair<Index, Index>> locate(double rho, double alpha_db) const;
};

struct DropResult {
  long long drop_index = 0;
  PairGeometry geometry;
  RateReport sdma;
  RateReport rsma;
  double gain_weak = 0.0;    // percent
  double gain_strong = 0.0;  // percent
  double gain_sum = 0.0;     // percent
  bool excluded = false;     // an SDMA denominator fell under kGainDenominatorFloor
};

void validate_edges(const std::vector<double>& rho_edges, const std::vector<double>& alpha_edges);

/// SDMA with equal private powers against RSMA with the sum-rate power split,
/// both on the same private precoders.
DropResult evaluate_pair_drop(const ChannelSet& ch, const ExperimentConfig& cfg, long long drop_index,
                              const PairGeometry& geometry);

/// Bins drops in index order. Gains are means of per-drop percentages over the
/// non-excluded drops of a cell.
BinGrid aggregate_bins(const std::vector<DropResult>& drops, const std::vector<double>& rho_edges,
                       const std::vector<double>& alpha_edges);

/// Draws (rho, alpha) uniformly over the edge ranges for each drop.
BinGrid run_binned_gains(const ExperimentConfig& cfg, long long n_drops, std::uint64_t seed);

/// Nearest-rank percentile: element ceil(p/100 * N) (1-based) of the ascending sort.
double nearest_rank(std::vector<double> values, double percentile);

enum class PercentileMetric { UserRate, WeakestUserRate };
std::string_view to_string(PercentileMetric metric);

inline constexpr double kPercentileSentinelFloor = 1e-9;

struct PercentileRow {
  double percentile = 0.0;
  PercentileMetric metric = PercentileMetric::UserRate;
  double sdma_value = 0.0;
  double rsma_value = 0.0;
  double gain_pct = 0.0;  // 100 when the SDMA value is below kPercentileSentinelFloor
  bool gt100 = false;
};

PercentileRow percentile_gain(const std::vector<double>& sdma, const std::vector<double>& rsma, double percentile,
                              PercentileMetric metric);

/// 5th and 50th percentile gains of pooled user rates and of per-drop weakest
/// user rates over i.i.d. drops.
std::vector<PercentileRow> run_percentile_gains(const ExperimentConfig& cfg, Index n_users, long long n_drops,
                                                std::uint64_t seed);

/// {0.1, 0.5, 0.9} x {0, -5, -10} dB.
std::vector<PairGeometry> default_pair_cases();

struct PairCaseRow {
  int case_id = 0;
  PairGeometry geometry;
  Scheme scheme = Scheme::SDMA;
  double user1_rate = 0.0;  // mean over drops
  double user2_rate = 0.0;
  double mean_min_rate = 0.0;  // mean over drops of the per-drop minimum
};

/// Per case and scheme, mean user throughputs over n_drops realisations.
/// SDMA uses equal private powers, NOMA the best max-min power split on the
/// max-min common beam, and RSMA the best max-min configuration among its
/// common-power grid and the NOMA configurations written as RSMA.
std::vector<PairCaseRow> run_pair_cases(const std::vector<PairGeometry>& cases, const ExperimentConfig& cfg,
                                        long long n_drops, std::uint64_t seed);

struct OverloadedTrace {
  Eigen::MatrixXd sdma;  // slot x user
  Eigen::MatrixXd rsma;  // slot x user
  RVector sdma_min;      // per slot
  RVector rsma_min;      // per slot
  double rsma_common_fraction = 0.0;

  /// min over users of the slot-averaged rate
  double sdma_time_averaged_min() const { return sdma.colwise().mean().minCoeff(); }
};

/// Two-antenna, four-user downlink over static channels. SDMA serves users
/// {1,2} in even slots and {3,4} in odd slots with ZF. RSMA serves everyone
/// every slot: ZF private streams for users 1 and 4, users 2 and 3 entirely on
/// the common stream, power split chosen for the best minimum rate.
OverloadedTrace run_overloaded(const ChannelSet& ch, long long n_slots, int grid_points = 101);
OverloadedTrace run_overloaded(const ExperimentConfig& cfg, long long n_slots, std::uint64_t seed);

/// Users 1 and 4 orthogonal, users 2 and 3 both on the diagonal direction.
ChannelSet overloaded_reference_channels(double snr_db = 20.0);

}  // namespace rsma
