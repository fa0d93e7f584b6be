#include "rsma/precoding.hpp"

#include <cmath>
#include <numbers>

#include "rsma/rates.hpp"

namespace rsma {

namespace {

constexpr double kUnitNormTolerance = 1e-9;

void normalize_columns(CMatrix& m, const char* what) {
  for (Index k = 0; k < m.cols(); ++k) {
    const double n = m.col(k).norm();
    if (!(n > 0.0)) {
      throw DegenerateInputError(std::string(what) + ": zero-norm precoder for user " + std::to_string(k));
    }
    m.col(k) /= n;
  }
}

CMatrix normalized_channels(const ChannelSet& ch) {
  CMatrix m = ch.channels;
  normalize_columns(m, "normalized_channels");
  return m;
}

double grid_value(int i, int grid_points) {
  return static_cast<double>(i) / static_cast<double>(grid_points - 1);
}

}  // namespace

void PrecoderSet::validate(double budget) const {
  auto unit = [](const CVector& v) { return std::abs(v.norm() - 1.0) <= kUnitNormTolerance; };
  if (power_private.size() != private_beams.cols()) {
    throw DimensionError("PrecoderSet: power and beam counts differ");
  }
  for (Index k = 0; k < private_beams.cols(); ++k) {
    if (!unit(private_beams.col(k))) {
      throw ConfigurationError("PrecoderSet: private beam " + std::to_string(k) + " is not unit norm");
    }
  }
  if ((common && !unit(*common)) || (sensing && !unit(*sensing))) {
    throw ConfigurationError("PrecoderSet: common/sensing beam is not unit norm");
  }
  if (power_common < 0.0 || power_sensing < 0.0 || (power_private.size() > 0 && power_private.minCoeff() < 0.0)) {
    throw ConfigurationError("PrecoderSet: negative power");
  }
  if ((!common && power_common != 0.0) || (!sensing && power_sensing != 0.0)) {
    throw ConfigurationError("PrecoderSet: power assigned to an absent stream");
  }
  if (total_power() > budget * (1.0 + kUnitNormTolerance)) {
    throw ConfigurationError("PrecoderSet: total power exceeds the budget");
  }
}

PrecoderSet split_power(const CMatrix& private_beams, const std::optional<CVector>& common, double budget,
                        double common_fraction) {
  const Index K = private_beams.cols();
  PrecoderSet pre;
  pre.private_beams = private_beams;
  pre.common = common;
  pre.power_common = common ? common_fraction * budget : 0.0;
  const double private_share = common ? (1.0 - common_fraction) * budget : budget;
  pre.power_private = RVector::Constant(K, private_share / static_cast<double>(K));
  return pre;
}

CMatrix private_precoders(const ChannelSet& ch, PrivateKind kind) {
  const Index K = ch.n_users();
  CMatrix beams;
  switch (kind) {
    case PrivateKind::MRT:
      beams = ch.channels;
      break;
    case PrivateKind::ZF:
      beams = pseudo_inverse(ch.channels.adjoint());
      break;
    case PrivateKind::MMSE: {
      const double reg = static_cast<double>(K) * ch.noise_variance / ch.tx_power;
      CMatrix gram = ch.channels.adjoint() * ch.channels;
      gram.diagonal().array() += reg;
      beams = ch.channels * gram.partialPivLu().inverse();
      break;
    }
  }
  normalize_columns(beams, "private_precoders");
  return beams;
}

CVector common_precoder(const ChannelSet& ch, CommonKind kind) {
  const Index K = ch.n_users();
  const CMatrix unit = normalized_channels(ch);
  if (K == 1) {
    return unit.col(0);
  }
  if (kind == CommonKind::SV) {
    return dominant_left_singular_vector(unit);
  }
  if (K != 2) {
    throw ConfigurationError("common_precoder: the max-min search is defined for K <= 2, got K = " +
                             std::to_string(K));
  }
  // Candidates live in span{h1~, h2~}, so scores only need the projections
  // a_kn = h_k^H hn~ and the cross term h1~^H h2~.
  const Eigen::Matrix2cd proj = ch.channels.adjoint() * unit;
  const cplx cross = unit.col(0).dot(unit.col(1));
  double best_score = -1.0;
  cplx best_a{0.0, 0.0};
  double best_b = 1.0;
  for (int i = 0; i < kMaxMinSplitSteps; ++i) {
    const double s = grid_value(i, kMaxMinSplitSteps);
    const double b = std::sqrt(1.0 - s);
    for (int j = 0; j < kMaxMinPhaseSteps; ++j) {
      const double psi = 2.0 * std::numbers::pi * j / kMaxMinPhaseSteps;
      const cplx a = std::polar(std::sqrt(s), psi);
      const double norm2 = s + (1.0 - s) + 2.0 * std::real(std::conj(a) * b * cross);
      if (!(norm2 > 1e-24)) {
        continue;
      }
      const double g0 = std::norm(a * proj(0, 0) + b * proj(0, 1));
      const double g1 = std::norm(a * proj(1, 0) + b * proj(1, 1));
      const double score = std::min(g0, g1) / norm2;
      if (score > best_score) {
        best_score = score;
        best_a = a;
        best_b = b;
      }
    }
  }
  CVector best = best_a * unit.col(0) + best_b * unit.col(1);
  best.normalize();
  return best;
}

namespace {

// Shared by allocate_power and the ISAC RSMA options: `base` carries the beams
// and any sensing power; only the common/private split of `budget` varies.
PrecoderSet search_common_split(const ChannelSet& ch, PrecoderSet base, double budget, int grid_points,
                                SplitObjective objective) {
  if (grid_points < 2) {
    throw ConfigurationError("power grid needs at least 2 points, got " + std::to_string(grid_points));
  }
  const Index K = base.n_users();
  base.power_private = RVector::Zero(K);
  const LinkGains gains = LinkGains::of(ch, base);

  double best_t = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double t = grid_value(i, grid_points);
    const RVector privates = RVector::Constant(K, (1.0 - t) * budget / static_cast<double>(K));
    const RateReport rep = rsma_rates(gains, t * budget, privates, base.power_sensing, AllocationPolicy::MaxMin);
    const double value = objective == SplitObjective::SumRate ? rep.sum_rate : rep.min_rate();
    if (value > best_value) {
      best_value = value;
      best_t = t;
    }
  }
  base.power_common = best_t * budget;
  base.power_private = RVector::Constant(K, (1.0 - best_t) * budget / static_cast<double>(K));
  return base;
}

}  // namespace

PrecoderSet allocate_power(const ChannelSet& ch, const CMatrix& private_beams, const CVector& common,
                           int grid_points, SplitObjective objective) {
  PrecoderSet base;
  base.private_beams = private_beams;
  base.common = common;
  return search_common_split(ch, std::move(base), ch.tx_power, grid_points, objective);
}

IsacOption parse_isac_option(std::string_view tag) {
  if (tag == "a.i") return IsacOption::DedicatedSdma;
  if (tag == "a.ii") return IsacOption::DedicatedRsma;
  if (tag == "b.i") return IsacOption::ReuseSdma;
  if (tag == "b.ii") return IsacOption::ReuseRsma;
  throw ConfigurationError("unknown ISAC option '" + std::string(tag) + "' (expected a.i, a.ii, b.i or b.ii)");
}

std::string_view to_string(IsacOption option) {
  switch (option) {
    case IsacOption::DedicatedSdma:
      return "a.i";
    case IsacOption::DedicatedRsma:
      return "a.ii";
    case IsacOption::ReuseSdma:
      return "b.i";
    case IsacOption::ReuseRsma:
      return "b.ii";
  }
  return "?";
}

CVector coherent_mix(const CVector& beam, const CVector& target, double mu) {
  const cplx overlap = beam.dot(target);  // p^H a
  const cplx align = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : cplx(1.0, 0.0);
  CVector mixed = std::sqrt(mu) * beam + std::sqrt(1.0 - mu) * align * target;
  return mixed.normalized();
}

PrecoderSet isac_mixed_precoders(const ChannelSet& ch, const CVector& target, double mu, IsacOption option,
                                 const PrecoderChoice& kinds, std::optional<double> common_fraction,
                                 int grid_points) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw ConfigurationError("isac_mixed_precoders: mu must lie in [0, 1]");
  }
  if (common_fraction && !(*common_fraction >= 0.0 && *common_fraction <= 1.0)) {
    throw ConfigurationError("isac_mixed_precoders: common_fraction must lie in [0, 1]");
  }
  if (target.size() != ch.n_tx()) {
    throw DimensionError("isac_mixed_precoders: target steering length does not match n_tx");
  }
  const bool rsma = uses_common_stream(option);
  const bool dedicated = option == IsacOption::DedicatedSdma || option == IsacOption::DedicatedRsma;

  CMatrix privates = private_precoders(ch, kinds.private_kind);
  std::optional<CVector> common;
  if (rsma) {
    common = common_precoder(ch, kinds.common_kind);
  }
  if (!dedicated) {
    for (Index k = 0; k < privates.cols(); ++k) {
      privates.col(k) = coherent_mix(privates.col(k), target, mu);
    }
    if (common) {
      common = coherent_mix(*common, target, mu);
    }
  }

  const double comm_budget = dedicated ? mu * ch.tx_power : ch.tx_power;
  PrecoderSet pre;
  if (rsma && !common_fraction) {
    PrecoderSet base;
    base.private_beams = std::move(privates);
    base.common = std::move(common);
    if (dedicated) {
      base.sensing = target;
      base.power_sensing = (1.0 - mu) * ch.tx_power;
    }
    return search_common_split(ch, std::move(base), comm_budget, grid_points, SplitObjective::SumRate);
  }
  pre = split_power(privates, common, comm_budget, common_fraction.value_or(0.0));
  if (dedicated) {
    pre.sensing = target;
    pre.power_sensing = (1.0 - mu) * ch.tx_power;
  }
  return pre;
}

}  // namespace rsma
