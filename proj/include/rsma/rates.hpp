#pragma once

#include <string_view>

#include "rsma/precoding.hpp"

namespace rsma {

enum class Scheme { RSMA, SDMA, NOMA };
enum class AllocationPolicy { MaxMin, AllToWeakest, EqualSplit };

std::string_view to_string(Scheme scheme);

/// Achievable rates of one scheme on one drop, bit/s/Hz.
struct RateReport {
  Scheme scheme = Scheme::SDMA;
  double common_rate = 0.0;
  RVector common_allocation;  // C_k, sums to common_rate
  RVector private_rates;      // R_k
  RVector user_totals;        // C_k + R_k
  double sum_rate = 0.0;

  double min_rate() const { return user_totals.minCoeff(); }
};

/// Squared beam gains |h_k^H p|^2 for every (user, stream) pair of a precoder set.
/// Powers are kept out so power searches can reuse one table.
struct LinkGains {
  Eigen::MatrixXd private_gain;  // (k, j): user k through private beam j
  RVector common_gain;           // zero when there is no common beam
  RVector sensing_gain;          // zero when there is no sensing beam
  double noise_variance = 1.0;

  static LinkGains of(const ChannelSet& ch, const PrecoderSet& pre);
};

/// Splits the common rate R_c over users.
///   MaxMin        water-fills the lowest private rates to maximise min_k (R_k + C_k)
///   AllToWeakest  all of R_c to the smallest R_k (lowest index on ties)
///   EqualSplit    R_c / K each
RVector allocate_common(double common_rate, const RVector& private_rates, AllocationPolicy policy);

/// One-layer RSMA with ideal SIC: every user decodes the common stream treating
/// all private (and sensing) streams as noise, removes it, then decodes its own
/// private stream. R_c is the worst user's common rate.
RateReport rsma_rates(const ChannelSet& ch, const PrecoderSet& pre,
                      AllocationPolicy policy = AllocationPolicy::MaxMin);
RateReport rsma_rates(const LinkGains& gains, double power_common, const RVector& power_private,
                      double power_sensing, AllocationPolicy policy = AllocationPolicy::MaxMin);

/// Linear precoding with interference treated as noise. Rejects a powered common stream.
RateReport sdma_rates(const ChannelSet& ch, const PrecoderSet& pre);

/// Two-user power-domain NOMA on one shared beam: the strong user decodes and
/// cancels the weak user's message, the weak user decodes its own through the
/// strong user's interference. The weak message is booked as the common rate.
RateReport noma_rates(const ChannelSet& ch, double power_split, const CVector& precoder);

/// User with the larger channel norm of a two-user set (user 0 on ties).
Index strong_user(const ChannelSet& ch);
inline Index weak_user(const ChannelSet& ch) { return 1 - strong_user(ch); }

}  // namespace rsma
