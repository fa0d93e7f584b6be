#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rsma/precoding.hpp"
#include "test_util.hpp"

using namespace rsma;

namespace {

CVector vec2(cplx a, cplx b) {
  CVector v(2);
  v << a, b;
  return v;
}

// Sum rate written out from scratch: common stream decoded by everyone, then
// each private stream against the other privates and noise.
double oracle_sum_rate(const ChannelSet& ch, const CMatrix& P, const CVector& c, double t) {
  const Index K = ch.n_users();
  const double pc = t * ch.tx_power;
  const double pk = (1.0 - t) * ch.tx_power / static_cast<double>(K);
  double common = 1e300;
  double sum = 0.0;
  for (Index k = 0; k < K; ++k) {
    double all_private = 0.0;
    for (Index j = 0; j < K; ++j) {
      all_private += pk * std::norm(ch.h(k).dot(P.col(j)));
    }
    const double own = pk * std::norm(ch.h(k).dot(P.col(k)));
    if (pc > 0.0) {
      common = std::min(common, std::log2(1.0 + pc * std::norm(ch.h(k).dot(c)) / (all_private + ch.noise_variance)));
    }
    sum += std::log2(1.0 + own / (all_private - own + ch.noise_variance));
  }
  return sum + (pc > 0.0 ? common : 0.0);
}

double min_gain(const ChannelSet& ch, const CVector& p) {
  return (ch.channels.adjoint() * p).cwiseAbs2().minCoeff();
}

ChannelSet random_channels(std::mt19937_64& gen, Index K, Index n_tx) {
  std::uniform_real_distribution<double> snr(-5.0, 30.0);
  const double sigma2 = 1.0 / std::pow(10.0, snr(gen) / 10.0);
  return make_channel_set(test::random_matrix(gen, n_tx, K), sigma2, 1.0);
}

}  // namespace

TEST_CASE("private_precoders examples") {
  const ChannelSet eye = make_channel_set(CMatrix::Identity(2, 2), 0.01, 1.0);
  const CMatrix zf = private_precoders(eye, PrivateKind::ZF);
  CHECK((zf - CMatrix::Identity(2, 2)).norm() < 1e-12);

  const ChannelSet single = make_channel_set(vec2(3.0, 4.0), 1.0, 1.0);
  const CMatrix mrt = private_precoders(single, PrivateKind::MRT);
  CHECK(mrt(0, 0).real() == doctest::Approx(0.6));
  CHECK(mrt(1, 0).real() == doctest::Approx(0.8));
}

TEST_CASE("MMSE approaches ZF at high SNR and MRT at low SNR") {
  std::mt19937_64 gen(23);
  for (int i = 0; i < 200; ++i) {
    const CMatrix H = test::random_matrix(gen, 2, 2);
    const CMatrix zf = private_precoders(make_channel_set(H, 1e-6, 1.0), PrivateKind::ZF);
    const CMatrix mmse_hi = private_precoders(make_channel_set(H, 1e-6, 1.0), PrivateKind::MMSE);
    const CMatrix mrt = private_precoders(make_channel_set(H, 1e6, 1.0), PrivateKind::MRT);
    const CMatrix mmse_lo = private_precoders(make_channel_set(H, 1e6, 1.0), PrivateKind::MMSE);
    for (Index k = 0; k < 2; ++k) {
      // angular distance, acos |a^H b|
      REQUIRE(std::acos(std::min(1.0, std::abs(mmse_hi.col(k).dot(zf.col(k))))) < 1e-3);
      REQUIRE(std::acos(std::min(1.0, std::abs(mmse_lo.col(k).dot(mrt.col(k))))) < 1e-3);
    }
  }
}

TEST_CASE("ZF nulls inter-user interference and MRT matches the channel norm") {
  std::mt19937_64 gen(29);
  for (int i = 0; i < 1000; ++i) {
    const Index n_tx = 2 + i % 3;
    const Index K = 1 + static_cast<Index>(gen() % static_cast<std::uint64_t>(n_tx));
    const ChannelSet ch = random_channels(gen, K, n_tx);
    const CMatrix zf = private_precoders(ch, PrivateKind::ZF);
    const CMatrix mrt = private_precoders(ch, PrivateKind::MRT);
    for (Index k = 0; k < K; ++k) {
      REQUIRE(std::abs(std::abs(ch.h(k).dot(mrt.col(k))) - ch.h(k).norm()) < 1e-12);
      for (Index j = 0; j < K; ++j) {
        if (j != k) {
          REQUIRE(std::abs(ch.h(j).dot(zf.col(k))) < 1e-9 * ch.h(j).norm());
        }
      }
    }
  }
}

TEST_CASE("ZF rejects overloaded and rank-deficient channels") {
  std::mt19937_64 gen(31);
  CHECK_THROWS_AS(private_precoders(random_channels(gen, 3, 2), PrivateKind::ZF), SingularityError);
  CMatrix H(2, 2);
  H << 1.0, 2.0, 1.0, 2.0;
  CHECK_THROWS_AS(private_precoders(make_channel_set(H, 1.0, 1.0), PrivateKind::ZF), SingularityError);
}

TEST_CASE("every precoder kind yields a valid precoder set") {
  std::mt19937_64 gen(37);
  for (auto kind : {PrivateKind::ZF, PrivateKind::MRT, PrivateKind::MMSE}) {
    for (int i = 0; i < 1000; ++i) {
      const ChannelSet ch = random_channels(gen, 2, 2 + i % 3);
      const CMatrix privates = private_precoders(ch, kind);
      const CVector common = common_precoder(ch, i % 2 == 0 ? CommonKind::SV : CommonKind::MaxMin);
      const PrecoderSet pre = allocate_power(ch, privates, common, 11);
      REQUIRE_NOTHROW(pre.validate(ch.tx_power));
      REQUIRE(std::abs(pre.total_power() - ch.tx_power) < 1e-9);
    }
  }
}

TEST_CASE("PrecoderSet::validate") {
  PrecoderSet pre = split_power(CMatrix::Identity(2, 2), std::nullopt, 1.0, 0.0);
  CHECK_NOTHROW(pre.validate(1.0));
  CHECK_THROWS_AS(pre.validate(0.9), ConfigurationError);
  pre.power_common = 0.1;
  CHECK_THROWS_AS(pre.validate(2.0), ConfigurationError);
  pre = split_power(2.0 * CMatrix::Identity(2, 2), std::nullopt, 1.0, 0.0);
  CHECK_THROWS_AS(pre.validate(1.0), ConfigurationError);
  pre = split_power(CMatrix::Identity(2, 2), std::nullopt, 1.0, 0.0);
  pre.power_private(0) = -0.1;
  CHECK_THROWS_AS(pre.validate(1.0), ConfigurationError);
}

TEST_CASE("common_precoder examples") {
  const ChannelSet one = make_channel_set(vec2(3.0, cplx(0.0, 4.0)), 1.0, 1.0);
  for (auto kind : {CommonKind::SV, CommonKind::MaxMin}) {
    CHECK((common_precoder(one, kind) - one.h(0) / 5.0).norm() < 1e-12);
  }

  CMatrix aligned(2, 2);
  aligned.col(0) = vec2(1.0, 1.0) / std::sqrt(2.0);
  aligned.col(1) = aligned.col(0);
  const ChannelSet al = make_channel_set(aligned, 1.0, 1.0);
  const CVector p = common_precoder(al, CommonKind::MaxMin);
  CHECK(min_gain(al, p) == doctest::Approx(1.0).epsilon(1e-12));

  const ChannelSet ortho = make_channel_set(CMatrix::Identity(2, 2), 1.0, 1.0);
  CHECK(std::abs(min_gain(ortho, common_precoder(ortho, CommonKind::MaxMin)) - 0.5) < 1e-3);

  CHECK_THROWS_AS(common_precoder(make_channel_set(CMatrix::Zero(2, 2), 1.0, 1.0), CommonKind::SV),
                  DegenerateInputError);
  std::mt19937_64 gen(41);
  CHECK_THROWS_AS(common_precoder(random_channels(gen, 3, 2), CommonKind::MaxMin), ConfigurationError);
  CHECK_NOTHROW(common_precoder(random_channels(gen, 3, 2), CommonKind::SV));
}

TEST_CASE("max-min common beam is close to a fine brute force over the unit sphere") {
  // For two antennas every unit vector is cos(a) e1 + sin(a) e^{jb} e2 up to phase.
  std::mt19937_64 gen(43);
  for (int i = 0; i < 100; ++i) {
    const ChannelSet ch = random_channels(gen, 2, 2);
    double best = 0.0;
    for (int a = 0; a <= 400; ++a) {
      const double ang = 0.5 * std::numbers::pi * a / 400.0;
      for (int b = 0; b < 400; ++b) {
        const CVector v = vec2(std::cos(ang), std::polar(std::sin(ang), 2.0 * std::numbers::pi * b / 400.0));
        best = std::max(best, min_gain(ch, v));
      }
    }
    const double got = min_gain(ch, common_precoder(ch, CommonKind::MaxMin));
    // Both searches are grids of the same continuous optimum.
    REQUIRE(got <= best * (1.0 + 1e-3));
    REQUIRE(got >= best * (1.0 - 2e-2));
  }
}

TEST_CASE("allocate_power examples against a brute-force sum rate") {
  const double sigma2 = noise_variance_for_snr(20.0, 1.0, 1.0);
  const ChannelSet ortho = make_channel_set(CMatrix::Identity(2, 2), sigma2, 1.0);
  const CMatrix zf = private_precoders(ortho, PrivateKind::ZF);
  const CVector c = common_precoder(ortho, CommonKind::MaxMin);
  PrecoderSet pre = allocate_power(ortho, zf, c, 101);
  CHECK(pre.power_common == 0.0);
  double best_t = 0.0;
  double best = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = oracle_sum_rate(ortho, zf, c, i / 100.0);
    if (v > best) {
      best = v;
      best_t = i / 100.0;
    }
  }
  CHECK(best_t == 0.0);

  CMatrix aligned(2, 2);
  aligned.col(0) = vec2(1.0, 0.0);
  aligned.col(1) = vec2(1.0, 0.0);
  const ChannelSet al = make_channel_set(aligned, sigma2, 1.0);
  const CMatrix mrt = private_precoders(al, PrivateKind::MRT);
  const CVector ca = common_precoder(al, CommonKind::MaxMin);
  pre = allocate_power(al, mrt, ca, 101);
  CHECK(pre.power_common > 0.0);
  CHECK(oracle_sum_rate(al, mrt, ca, pre.power_common) > oracle_sum_rate(al, mrt, ca, 0.0));

  CHECK_THROWS_AS(allocate_power(ortho, zf, c, 1), ConfigurationError);
}

TEST_CASE("allocate_power matches an independent grid search and never loses to SDMA") {
  std::mt19937_64 gen(47);
  for (int i = 0; i < 1000; ++i) {
    const ChannelSet ch = random_channels(gen, 2, 2 + i % 2);
    const CMatrix P = private_precoders(ch, static_cast<PrivateKind>(i % 3));
    const CVector c = common_precoder(ch, CommonKind::SV);
    const int G = 2 + i % 20;
    const PrecoderSet pre = allocate_power(ch, P, c, G);
    const double t = pre.power_common / ch.tx_power;
    double best = -1.0;
    for (int g = 0; g < G; ++g) {
      best = std::max(best, oracle_sum_rate(ch, P, c, static_cast<double>(g) / (G - 1)));
    }
    REQUIRE(std::abs(oracle_sum_rate(ch, P, c, t) - best) < 1e-9);
    REQUIRE(oracle_sum_rate(ch, P, c, t) >= oracle_sum_rate(ch, P, c, 0.0) - 1e-12);
  }
}

TEST_CASE("isac option tags") {
  for (const char* tag : {"a.i", "a.ii", "b.i", "b.ii"}) {
    CHECK(to_string(parse_isac_option(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_isac_option("c.i"), ConfigurationError);
  CHECK_THROWS_AS(parse_isac_option(""), ConfigurationError);
}

TEST_CASE("isac_mixed_precoders mixing limits") {
  std::mt19937_64 gen(53);
  const ChannelSet ch = random_channels(gen, 2, 2);
  const CVector target = test::random_unit(gen, 2);
  const PrecoderChoice kinds{PrivateKind::ZF, CommonKind::MaxMin};
  const CMatrix comm = private_precoders(ch, PrivateKind::ZF);

  const PrecoderSet full = isac_mixed_precoders(ch, target, 1.0, IsacOption::ReuseSdma, kinds);
  CHECK((full.private_beams - comm).norm() < 1e-12);
  CHECK(full.power_sensing == 0.0);

  const PrecoderSet none = isac_mixed_precoders(ch, target, 0.0, IsacOption::ReuseSdma, kinds);
  for (Index k = 0; k < 2; ++k) {
    CHECK(std::abs(std::abs(none.private_beams.col(k).dot(target)) - 1.0) < 1e-12);
  }

  const PrecoderSet sense = isac_mixed_precoders(ch, target, 0.0, IsacOption::DedicatedSdma, kinds);
  CHECK(sense.power_sensing == doctest::Approx(ch.tx_power));
  CHECK(sense.power_private.sum() == 0.0);
  CHECK(sense.power_common == 0.0);

  const PrecoderSet split = isac_mixed_precoders(ch, target, 0.6, IsacOption::DedicatedRsma, kinds, 0.25);
  CHECK(split.power_sensing == doctest::Approx(0.4));
  CHECK(split.power_common == doctest::Approx(0.15));
  CHECK(split.power_private.sum() == doctest::Approx(0.45));

  CHECK_THROWS_AS(isac_mixed_precoders(ch, target, 1.2, IsacOption::ReuseSdma, kinds), ConfigurationError);
  CHECK_THROWS_AS(isac_mixed_precoders(ch, target, 0.5, IsacOption::ReuseRsma, kinds, -0.1), ConfigurationError);
  CHECK_THROWS_AS(isac_mixed_precoders(ch, CVector::Ones(3), 0.5, IsacOption::ReuseSdma, kinds), DimensionError);
}

TEST_CASE("coherent mixing adds in phase") {
  std::mt19937_64 gen(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const CVector p = test::random_unit(gen, 3);
    const CVector a = test::random_unit(gen, 3) * test::random_nonzero_scalar(gen);
    const CVector unit_a = a.normalized();
    const double mu = u(gen);
    const CVector m = coherent_mix(p, unit_a, mu);
    REQUIRE(std::abs(m.norm() - 1.0) < 1e-12);
    // The chosen phase gives the largest unnormalised norm of any phase.
    const double chosen = (std::sqrt(mu) * p + std::sqrt(1.0 - mu) * std::conj(p.dot(unit_a)) /
                                                   std::abs(p.dot(unit_a)) * unit_a)
                              .norm();
    for (int j = 0; j < 16; ++j) {
      const cplx ph = std::polar(1.0, 2.0 * std::numbers::pi * j / 16.0);
      REQUIRE((std::sqrt(mu) * p + std::sqrt(1.0 - mu) * ph * unit_a).norm() <= chosen + 1e-12);
    }
  }
}

TEST_CASE("isac precoder sets keep the power budget") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const ChannelSet ch = random_channels(gen, 2, 2);
    const auto option = static_cast<IsacOption>(i % 4);
    const PrecoderSet pre = isac_mixed_precoders(ch, test::random_unit(gen, 2), u(gen), option,
                                                 PrecoderChoice{PrivateKind::MMSE, CommonKind::SV}, std::nullopt, 11);
    REQUIRE_NOTHROW(pre.validate(ch.tx_power));
    REQUIRE(std::abs(pre.total_power() - ch.tx_power) < 1e-9);
  }
}
