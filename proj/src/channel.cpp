#include "rsma/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rsma {

void ChannelSet::validate() const {
  if (channels.cols() < 1 || channels.rows() < 1) {
    throw ConfigurationError("ChannelSet: need at least one user and one antenna");
  }
  if (!channels.allFinite()) {
    throw ConfigurationError("ChannelSet: non-finite channel entry");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw ConfigurationError("ChannelSet: noise_variance must be positive");
  }
  if (!(tx_power > 0.0) || !std::isfinite(tx_power)) {
    throw ConfigurationError("ChannelSet: tx_power must be positive");
  }
}

ChannelSet make_channel_set(CMatrix channels, double noise_variance, double tx_power) {
  ChannelSet ch{std::move(channels), noise_variance, tx_power};
  ch.validate();
  return ch;
}

double noise_variance_for_snr(double snr_db, double tx_power, double reference_gain) {
  return tx_power * reference_gain / std::pow(10.0, snr_db / 10.0);
}

void PairGeometry::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ConfigurationError("PairGeometry: rho must lie in [0, 1], got " + std::to_string(rho));
  }
  if (!(alpha_db <= 0.0)) {
    throw ConfigurationError("PairGeometry: alpha_db must be <= 0, got " + std::to_string(alpha_db));
  }
}

namespace {

CVector draw_gaussian(Index n, double variance, Rng& rng) {
  CVector v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = rng.complex_normal(variance);
  }
  return v;
}

}  // namespace

CVector correlated_partner(const CVector& reference, double rho, double gain, Rng& rng) {
  const Index n = reference.size();
  if (n < 2) {
    throw DimensionError("correlated_partner: need at least two antennas");
  }
  const CVector u = reference.normalized();
  CVector ortho;
  do {
    const CVector g = draw_gaussian(n, 1.0, rng);
    ortho = g - u * u.dot(g);
  } while (!(ortho.norm() > 1e-6));
  ortho.normalize();
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const cplx phase = std::polar(1.0, phi);
  return std::sqrt(gain) * (std::sqrt(1.0 - rho * rho) * phase * u + rho * ortho);
}

ChannelSet generate_pair(const PairGeometry& geom, Index n_tx, double snr_db, std::uint64_t seed, double tx_power) {
  geom.validate();
  if (n_tx < 2) {
    throw ConfigurationError("generate_pair: n_tx must be >= 2");
  }
  Rng rng(seed);
  CVector h1 = draw_gaussian(n_tx, 1.0 / static_cast<double>(n_tx), rng);
  h1.normalize();
  const double gain2 = std::pow(10.0, geom.alpha_db / 10.0);

  CMatrix H(n_tx, 2);
  H.col(0) = h1;
  H.col(1) = correlated_partner(h1, geom.rho, gain2, rng);
  return make_channel_set(std::move(H), noise_variance_for_snr(snr_db, tx_power), tx_power);
}

ChannelSet generate_iid(Index n_users, Index n_tx, double snr_db, std::uint64_t seed, double tx_power) {
  if (n_users < 1 || n_tx < 1) {
    throw ConfigurationError("generate_iid: need n_users >= 1 and n_tx >= 1");
  }
  Rng rng(seed);
  CMatrix H(n_tx, n_users);
  for (Index k = 0; k < n_users; ++k) {
    H.col(k) = draw_gaussian(n_tx, 1.0 / static_cast<double>(n_tx), rng);
  }
  return make_channel_set(std::move(H), noise_variance_for_snr(snr_db, tx_power), tx_power);
}

}  // namespace rsma
