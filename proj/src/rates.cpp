#include "rsma/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rsma {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::RSMA:
      return "rsma";
    case Scheme::SDMA:
      return "sdma";
    case Scheme::NOMA:
      return "noma";
  }
  return "?";
}

LinkGains LinkGains::of(const ChannelSet& ch, const PrecoderSet& pre) {
  const Index K = ch.n_users();
  if (pre.private_beams.cols() != K || pre.private_beams.rows() != ch.n_tx() || pre.power_private.size() != K) {
    throw DimensionError("LinkGains: precoder set does not match the channel set");
  }
  LinkGains g;
  g.noise_variance = ch.noise_variance;
  // Row k of H^H P holds h_k^H p_j.
  g.private_gain = (ch.channels.adjoint() * pre.private_beams).cwiseAbs2();
  g.common_gain = RVector::Zero(K);
  g.sensing_gain = RVector::Zero(K);
  if (pre.common) {
    g.common_gain = (ch.channels.adjoint() * *pre.common).cwiseAbs2();
  }
  if (pre.sensing) {
    g.sensing_gain = (ch.channels.adjoint() * *pre.sensing).cwiseAbs2();
  }
  return g;
}

RVector allocate_common(double common_rate, const RVector& private_rates, AllocationPolicy policy) {
  const Index K = private_rates.size();
  RVector c = RVector::Zero(K);
  if (K == 0 || common_rate <= 0.0) {
    return c;
  }
  switch (policy) {
    case AllocationPolicy::EqualSplit:
      c.setConstant(common_rate / static_cast<double>(K));
      break;
    case AllocationPolicy::AllToWeakest: {
      Index weakest = 0;
      private_rates.minCoeff(&weakest);  // first minimum
      c(weakest) = common_rate;
      break;
    }
    case AllocationPolicy::MaxMin: {
      std::vector<Index> order(static_cast<std::size_t>(K));
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Index a, Index b) { return private_rates(a) < private_rates(b); });
      // Raise the m lowest users to a common level until it reaches the next rate.
      double filled = 0.0;
      double level = 0.0;
      Index m = 0;
      while (m < K) {
        filled += private_rates(order[m]);
        ++m;
        level = (common_rate + filled) / static_cast<double>(m);
        if (m == K || level <= private_rates(order[m])) {
          break;
        }
      }
      for (Index i = 0; i < m; ++i) {
        c(order[i]) = std::max(0.0, level - private_rates(order[i]));
      }
      Index largest = 0;
      c.maxCoeff(&largest);
      c(largest) = std::max(0.0, c(largest) + (common_rate - c.sum()));
      break;
    }
  }
  return c;
}

namespace {

RVector private_rates_of(const LinkGains& g, const RVector& power_private, double power_sensing) {
  const Index K = power_private.size();
  RVector r(K);
  for (Index k = 0; k < K; ++k) {
    double interference = 0.0;
    for (Index j = 0; j < K; ++j) {
      if (j != k) {
        interference += power_private(j) * g.private_gain(k, j);
      }
    }
    interference += power_sensing * g.sensing_gain(k);
    r(k) = std::log2(1.0 + power_private(k) * g.private_gain(k, k) / (interference + g.noise_variance));
  }
  return r;
}

RateReport finish(Scheme scheme, double common_rate, RVector allocation, RVector privates) {
  RateReport rep;
  rep.scheme = scheme;
  rep.common_rate = common_rate;
  rep.user_totals = allocation + privates;
  rep.common_allocation = std::move(allocation);
  rep.private_rates = std::move(privates);
  rep.sum_rate = rep.user_totals.sum();
  return rep;
}

}  // namespace

RateReport rsma_rates(const LinkGains& g, double power_common, const RVector& power_private, double power_sensing,
                      AllocationPolicy policy) {
  const Index K = power_private.size();
  double common_rate = 0.0;
  if (power_common > 0.0) {
    common_rate = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < K; ++k) {
      const double interference =
          g.private_gain.row(k).dot(power_private) + power_sensing * g.sensing_gain(k) + g.noise_variance;
      common_rate = std::min(common_rate, std::log2(1.0 + power_common * g.common_gain(k) / interference));
    }
  }
  RVector privates = private_rates_of(g, power_private, power_sensing);
  RVector allocation = allocate_common(common_rate, privates, policy);
  return finish(Scheme::RSMA, common_rate, std::move(allocation), std::move(privates));
}

RateReport rsma_rates(const ChannelSet& ch, const PrecoderSet& pre, AllocationPolicy policy) {
  if (pre.power_common > 0.0 && !pre.common) {
    throw ConfigurationError("rsma_rates: common power without a common precoder");
  }
  return rsma_rates(LinkGains::of(ch, pre), pre.power_common, pre.power_private, pre.power_sensing, policy);
}

RateReport sdma_rates(const ChannelSet& ch, const PrecoderSet& pre) {
  if (pre.power_common > 0.0) {
    throw ConfigurationError("sdma_rates: SDMA has no common stream");
  }
  const LinkGains g = LinkGains::of(ch, pre);
  const Index K = ch.n_users();
  return finish(Scheme::SDMA, 0.0, RVector::Zero(K), private_rates_of(g, pre.power_private, pre.power_sensing));
}

Index strong_user(const ChannelSet& ch) {
  if (ch.n_users() != 2) {
    throw ConfigurationError("strong_user: defined for two users only");
  }
  return ch.h(1).squaredNorm() > ch.h(0).squaredNorm() ? 1 : 0;
}

RateReport noma_rates(const ChannelSet& ch, double power_split, const CVector& precoder) {
  if (ch.n_users() != 2) {
    throw ConfigurationError("noma_rates: two-user NOMA needs exactly K = 2, got " +
                             std::to_string(ch.n_users()));
  }
  if (!(power_split >= 0.0 && power_split <= 1.0)) {
    throw ConfigurationError("noma_rates: power_split must lie in [0, 1]");
  }
  if (precoder.size() != ch.n_tx()) {
    throw DimensionError("noma_rates: precoder length does not match n_tx");
  }
  const Index s = strong_user(ch);
  const Index w = 1 - s;
  const double p_weak = power_split * ch.tx_power;
  const double p_strong = (1.0 - power_split) * ch.tx_power;
  const RVector gain = (ch.channels.adjoint() * precoder).cwiseAbs2();
  const double sigma2 = ch.noise_variance;

  double weak_rate = 0.0;
  if (p_weak > 0.0) {
    weak_rate = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < 2; ++k) {
      weak_rate = std::min(weak_rate, std::log2(1.0 + p_weak * gain(k) / (p_strong * gain(k) + sigma2)));
    }
  }
  RVector allocation = RVector::Zero(2);
  allocation(w) = weak_rate;
  RVector privates = RVector::Zero(2);
  privates(s) = std::log2(1.0 + p_strong * gain(s) / sigma2);
  return finish(Scheme::NOMA, weak_rate, std::move(allocation), std::move(privates));
}

}  // namespace rsma
