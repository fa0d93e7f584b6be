#pragma once

#include <algorithm>
#include <cstdint>

#include "rsma/numerics.hpp"
#include "rsma/rng.hpp"

namespace rsma {

/// One drop: K single-antenna users served by an n_tx-antenna transmitter.
/// Column k of `channels` is the downlink channel h_k of user k.
struct ChannelSet {
  CMatrix channels;
  double noise_variance = 1.0;  // per user, watts
  double tx_power = 1.0;        // total budget, watts

  Index n_tx() const { return channels.rows(); }
  Index n_users() const { return channels.cols(); }
  auto h(Index k) const { return channels.col(k); }

  /// Throws ConfigurationError when a field violates its bounds.
  void validate() const;
};

ChannelSet make_channel_set(CMatrix channels, double noise_variance, double tx_power);

/// Noise variance giving tx_power * reference_gain / sigma^2 = snr_db.
double noise_variance_for_snr(double snr_db, double tx_power, double reference_gain = 1.0);

struct PairGeometry {
  double rho = 0.0;       // 0 aligned, 1 orthogonal
  double alpha_db = 0.0;  // weak-to-strong channel gain ratio, <= 0

  void validate() const;
};

/// Sine of the principal angle between h1 and h2.
template <typename DerivedA, typename DerivedB>
double spatial_correlation(const Eigen::MatrixBase<DerivedA>& h1, const Eigen::MatrixBase<DerivedB>& h2) {
  const double n1 = h1.squaredNorm();
  const double n2 = h2.squaredNorm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) {
    throw DegenerateInputError("spatial_correlation: zero channel vector");
  }
  // The residual of h2 off the h1 line keeps small angles accurate, where
  // sqrt(1 - cos^2) would lose half the digits.
  const auto coeff = hermitian_inner(h1, h2) / n1;
  const CVector residual = h2 - coeff * h1;
  return std::clamp(std::sqrt(residual.squaredNorm() / n2), 0.0, 1.0);
}

/// 10 log10 of the weaker-to-stronger channel gain ratio; symmetric in its arguments.
template <typename DerivedA, typename DerivedB>
double sinr_disparity(const Eigen::MatrixBase<DerivedA>& h_a, const Eigen::MatrixBase<DerivedB>& h_b) {
  const double ga = h_a.squaredNorm();
  const double gb = h_b.squaredNorm();
  if (!(ga > 0.0) || !(gb > 0.0)) {
    throw DegenerateInputError("sinr_disparity: zero channel vector");
  }
  return 10.0 * std::log10(std::min(ga, gb) / std::max(ga, gb));
}

/// Vector of squared norm `gain` whose spatial correlation with `reference` is `rho`.
CVector correlated_partner(const CVector& reference, double rho, double gain, Rng& rng);

/// Two-user drop with prescribed (rho, alpha). h1 has unit norm, h2 is the weaker user.
ChannelSet generate_pair(const PairGeometry& geom, Index n_tx, double snr_db, std::uint64_t seed,
                         double tx_power = 1.0);

/// K i.i.d. Rayleigh channels with entries CN(0, 1/n_tx).
ChannelSet generate_iid(Index n_users, Index n_tx, double snr_db, std::uint64_t seed, double tx_power = 1.0);

}  // namespace rsma
