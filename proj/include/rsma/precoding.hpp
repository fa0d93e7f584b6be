#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rsma/channel.hpp"

namespace rsma {

enum class PrivateKind { ZF, MRT, MMSE };
enum class CommonKind { SV, MaxMin };

/// Private-stream family plus common-stream family for one scheme configuration.
struct PrecoderChoice {
  PrivateKind private_kind = PrivateKind::MMSE;
  CommonKind common_kind = CommonKind::MaxMin;
};

/// Unit-norm beams and their transmit powers. Column k of `private_beams`
/// carries user k's private stream.
struct PrecoderSet {
  std::optional<CVector> common;
  CMatrix private_beams;
  std::optional<CVector> sensing;
  double power_common = 0.0;
  RVector power_private;
  double power_sensing = 0.0;

  Index n_users() const { return private_beams.cols(); }
  double total_power() const { return power_common + power_private.sum() + power_sensing; }

  /// Checks unit norms (1e-9), non-negative powers and total <= budget (1e-9).
  void validate(double budget) const;
};

/// Fraction of the budget given to the common stream, remainder split equally
/// over the K private streams.
PrecoderSet split_power(const CMatrix& private_beams, const std::optional<CVector>& common, double budget,
                        double common_fraction);

/// K unit-norm private precoders, column k for user k.
///   MRT  h_k / |h_k|
///   ZF   columns of H^H (H H^H)^{-1}, H with rows h_k^H
///   MMSE columns of H^H (H H^H + K sigma^2 / P I)^{-1}
CMatrix private_precoders(const ChannelSet& ch, PrivateKind kind);

/// Unit-norm common-stream precoder.
///
/// SV takes the dominant left singular vector of the column-normalised channel
/// matrix. MaxMin searches p proportional to sqrt(s) e^{j psi} h1~ + sqrt(1-s) h2~
/// over 101 values of s and 64 of psi, maximising min_k |h_k^H p|^2; it is only
/// defined for K <= 2. Both reduce to h_1 / |h_1| when K = 1.
CVector common_precoder(const ChannelSet& ch, CommonKind kind);

inline constexpr int kMaxMinSplitSteps = 101;
inline constexpr int kMaxMinPhaseSteps = 64;

/// What a common-power grid search maximises.
enum class SplitObjective { SumRate, MinUserRate };

/// Grid search of the common-power fraction t over {0, 1/(G-1), ..., 1}.
/// Every candidate gives t*P to the common stream and (1-t)*P/K to each
/// private stream; the first (smallest) t reaching the best objective wins.
PrecoderSet allocate_power(const ChannelSet& ch, const CMatrix& private_beams, const CVector& common,
                           int grid_points, SplitObjective objective = SplitObjective::SumRate);

enum class IsacOption { DedicatedSdma, DedicatedRsma, ReuseSdma, ReuseRsma };

IsacOption parse_isac_option(std::string_view tag);
std::string_view to_string(IsacOption option);
inline bool uses_common_stream(IsacOption o) {
  return o == IsacOption::DedicatedRsma || o == IsacOption::ReuseRsma;
}

/// normalize(sqrt(mu) p + sqrt(1-mu) e^{j theta} a), theta chosen so both
/// terms add in phase.
CVector coherent_mix(const CVector& beam, const CVector& target, double mu);

/// Precoders for a joint sensing/communication transmitter.
///
/// a.i / a.ii add a sensing beam along `target` with (1-mu)*P and spend mu*P on
/// communication (SDMA, or RSMA split by `common_fraction`). b.i / b.ii use the
/// whole budget for communication and bend every beam towards the target with
/// coherent_mix. Without `common_fraction` the RSMA options pick it by a
/// sum-rate grid search over `grid_points` values.
PrecoderSet isac_mixed_precoders(const ChannelSet& ch, const CVector& target, double mu, IsacOption option,
                                 const PrecoderChoice& kinds, std::optional<double> common_fraction = std::nullopt,
                                 int grid_points = 101);

}  // namespace rsma
