#include <doctest.h>

#include <numeric>

#include "rsma/montecarlo.hpp"

using namespace rsma;

namespace {

DropResult fake_drop(double rho, double alpha, double gw, double gs, double gsum, bool excluded = false) {
  DropResult d;
  d.geometry = PairGeometry{rho, alpha};
  d.gain_weak = gw;
  d.gain_strong = gs;
  d.gain_sum = gsum;
  d.excluded = excluded;
  return d;
}

ExperimentConfig mmse_config() {
  ExperimentConfig cfg;
  cfg.kinds = PrecoderChoice{PrivateKind::MMSE, CommonKind::MaxMin};
  cfg.snr_db = 20.0;
  return cfg;
}

bool same_grid(const BinGrid& a, const BinGrid& b) {
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const GainCell& x = a.cells[i];
    const GainCell& y = b.cells[i];
    if (x.n != y.n || x.n_excluded != y.n_excluded || x.g_w != y.g_w || x.g_s != y.g_s || x.g_sum != y.g_sum) {
      return false;
    }
  }
  return a.cells.size() == b.cells.size();
}

}  // namespace

TEST_CASE("an empty run reports empty cells") {
  const BinGrid g = run_binned_gains(mmse_config(), 0, 1);
  CHECK(g.cells.size() == 10);
  for (const auto& c : g.cells) {
    CHECK(c.n == 0);
    CHECK(c.g_w == 0.0);
    CHECK(c.g_s == 0.0);
    CHECK(c.g_sum == 0.0);
  }
}

TEST_CASE("cells below ten drops report zero gains") {
  const std::vector<double> rho{0.0, 1.0};
  const std::vector<double> alpha{-10.0, 0.0};
  std::vector<DropResult> drops(9, fake_drop(0.5, -5.0, 10.0, 20.0, 30.0));
  BinGrid g = aggregate_bins(drops, rho, alpha);
  CHECK(g.at(0, 0).n == 9);
  CHECK(g.at(0, 0).g_w == 0.0);
  CHECK(g.at(0, 0).g_sum == 0.0);
  drops.push_back(fake_drop(0.5, -5.0, 10.0, 20.0, 30.0));
  g = aggregate_bins(drops, rho, alpha);
  CHECK(g.at(0, 0).g_w == doctest::Approx(10.0));
  CHECK(g.at(0, 0).g_s == doctest::Approx(20.0));
  CHECK(g.at(0, 0).g_sum == doctest::Approx(30.0));
}

TEST_CASE("cell gain is the mean of per-drop gains, not the gain of mean rates") {
  // Three drops with SDMA/RSMA sum rates (1, 2), (2, 2), (4, 3):
  // per-drop gains 100, 0, -25 average to 25; the gain of the mean sums
  // (7/3 vs 7/3) would be 0.
  const double sdma[] = {1.0, 2.0, 4.0};
  const double rsma[] = {2.0, 2.0, 3.0};
  std::vector<DropResult> drops;
  for (int i = 0; i < 3; ++i) {
    const double g = 100.0 * (rsma[i] - sdma[i]) / sdma[i];
    for (int rep = 0; rep < 4; ++rep) {  // 12 drops keeps the cell above the minimum count
      drops.push_back(fake_drop(0.1, -1.0, 0.0, 0.0, g));
    }
  }
  const BinGrid grid = aggregate_bins(drops, {0.0, 1.0}, {-10.0, 0.0});
  CHECK(grid.at(0, 0).g_sum == doctest::Approx(25.0));
}

TEST_CASE("excluded drops count in N but not in the means") {
  std::vector<DropResult> drops(10, fake_drop(0.5, -5.0, 10.0, 10.0, 10.0));
  drops.push_back(fake_drop(0.5, -5.0, 1e9, 1e9, 1e9, true));
  const BinGrid g = aggregate_bins(drops, {0.0, 1.0}, {-10.0, 0.0});
  CHECK(g.at(0, 0).n == 11);
  CHECK(g.at(0, 0).n_excluded == 1);
  CHECK(g.at(0, 0).g_w == doctest::Approx(10.0));
}

TEST_CASE("every in-range geometry lands in exactly one cell") {
  BinGrid g{{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, {-20.0, -10.0, 0.0}, {}};
  CHECK(g.locate(0.0, -20.0) == std::make_pair(Index{0}, Index{0}));
  CHECK(g.locate(0.2, -10.0) == std::make_pair(Index{1}, Index{0}));
  CHECK(g.locate(1.0, 0.0) == std::make_pair(Index{4}, Index{1}));
  CHECK(g.locate(0.199999, -9.99999) == std::make_pair(Index{0}, Index{1}));
  CHECK_FALSE(g.locate(1.01, -5.0));
  CHECK_FALSE(g.locate(0.5, -20.5));

  std::mt19937_64 gen(67);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  std::uniform_real_distribution<double> ua(-20.0, 0.0);
  for (int i = 0; i < 10000; ++i) {
    const double rho = ur(gen);
    const double alpha = ua(gen);
    int hits = 0;
    for (Index r = 0; r < g.rho_bins(); ++r) {
      for (Index a = 0; a < g.alpha_bins(); ++a) {
        const bool in_r = rho >= g.rho_edges[r] && rho < g.rho_edges[r + 1];
        const bool in_a = alpha > g.alpha_edges[a] && alpha <= g.alpha_edges[a + 1];
        if (in_r && in_a) {
          ++hits;
          REQUIRE(g.locate(rho, alpha) == std::make_pair(r, a));
        }
      }
    }
    REQUIRE(hits == 1);
  }
}

TEST_CASE("bin edges are validated") {
  CHECK_THROWS_AS(validate_edges({0.0}, {-10.0, 0.0}), ConfigurationError);
  CHECK_THROWS_AS(validate_edges({0.0, 0.5, 0.5}, {-10.0, 0.0}), ConfigurationError);
  CHECK_THROWS_AS(validate_edges({0.0, 1.5}, {-10.0, 0.0}), ConfigurationError);
  CHECK_THROWS_AS(validate_edges({0.0, 1.0}, {-10.0, 5.0}), ConfigurationError);
  CHECK_NOTHROW(validate_edges({0.0, 1.0}, {-10.0, 0.0}));
}

TEST_CASE("binned run conserves drops and is independent of worker count") {
  ExperimentConfig cfg = mmse_config();
  cfg.power_grid_points = 21;
  cfg.workers = 1;
  const BinGrid one = run_binned_gains(cfg, 300, 99);
  long long total = 0;
  for (const auto& c : one.cells) {
    total += c.n;
  }
  CHECK(total == 300);
  cfg.workers = 4;
  CHECK(same_grid(one, run_binned_gains(cfg, 300, 99)));
  CHECK_FALSE(same_grid(one, run_binned_gains(cfg, 300, 100)));
}

TEST_CASE("the weak user gains at low correlation") {
  ExperimentConfig cfg = mmse_config();
  cfg.rho_edges = {0.0, 0.1, 0.2};
  cfg.alpha_edges = {-10.0, -5.0, 0.0};
  const BinGrid g = run_binned_gains(cfg, 2000, 2024);
  for (const auto& c : g.cells) {
    REQUIRE(c.n >= kMinDropsPerCell);
    CHECK(c.g_w > 0.0);
  }
}

TEST_CASE("evaluate_pair_drop: RSMA never loses sum rate to SDMA") {
  const ExperimentConfig cfg = mmse_config();
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const PairGeometry geom{u(gen), -20.0 * u(gen)};
    const ChannelSet ch = generate_pair(geom, 2, 20.0, gen());
    const DropResult d = evaluate_pair_drop(ch, cfg, i, geom);
    REQUIRE(d.rsma.sum_rate >= d.sdma.sum_rate - 1e-12);
    REQUIRE(std::isfinite(d.gain_weak));
    REQUIRE(std::isfinite(d.gain_sum));
  }
}

TEST_CASE("nearest_rank") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
  CHECK(nearest_rank(v, 5.0) == 5.0);
  CHECK(nearest_rank(v, 50.0) == 50.0);
  CHECK(nearest_rank(v, 100.0) == 100.0);
  CHECK(nearest_rank({7.0, 1.0, 3.0}, 50.0) == 3.0);  // ceil(1.5) = 2nd smallest
  CHECK_THROWS_AS(nearest_rank({}, 5.0), ConfigurationError);
  CHECK_THROWS_AS(nearest_rank(v, 0.0), ConfigurationError);
}

TEST_CASE("percentile_gain") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const PercentileRow same = percentile_gain(v, v, 5.0, PercentileMetric::UserRate);
  CHECK(same.gain_pct == 0.0);
  CHECK_FALSE(same.gt100);

  std::vector<double> tripled = v;
  for (double& x : tripled) {
    x *= 3.0;
  }
  const PercentileRow big = percentile_gain(v, tripled, 50.0, PercentileMetric::WeakestUserRate);
  CHECK(big.gain_pct == doctest::Approx(200.0));
  CHECK(big.gt100);

  const std::vector<double> zeros(100, 0.0);
  const PercentileRow sentinel = percentile_gain(zeros, v, 5.0, PercentileMetric::WeakestUserRate);
  CHECK(sentinel.gain_pct == 100.0);
  CHECK(sentinel.gt100);
  CHECK_FALSE(percentile_gain(zeros, zeros, 5.0, PercentileMetric::UserRate).gt100);
}

TEST_CASE("run_percentile_gains") {
  ExperimentConfig cfg = mmse_config();
  cfg.power_grid_points = 21;
  cfg.workers = 1;
  const auto rows = run_percentile_gains(cfg, 2, 200, 5);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.gain_pct));
  }
  cfg.workers = 3;
  const auto again = run_percentile_gains(cfg, 2, 200, 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].rsma_value == again[i].rsma_value);
    CHECK(rows[i].sdma_value == again[i].sdma_value);
  }
  CHECK_THROWS_AS(run_percentile_gains(cfg, 3, 200, 5), ConfigurationError);
  CHECK_THROWS_AS(run_percentile_gains(cfg, 2, 99, 5), ConfigurationError);
}

TEST_CASE("default pair cases") {
  const auto cases = default_pair_cases();
  REQUIRE(cases.size() == 9);
  CHECK(cases.front().rho == 0.1);
  CHECK(cases.front().alpha_db == 0.0);
  CHECK(cases.back().rho == 0.9);
  CHECK(cases.back().alpha_db == -10.0);
}

TEST_CASE("orthogonal equal-strength pair: RSMA matches ZF SDMA") {
  ExperimentConfig cfg;
  cfg.kinds = PrecoderChoice{PrivateKind::ZF, CommonKind::MaxMin};
  const auto rows = run_pair_cases({PairGeometry{1.0, 0.0}}, cfg, 50, 8);
  REQUIRE(rows.size() == 3);
  const PairCaseRow& rsma = rows[0];
  const PairCaseRow& sdma = rows[1];
  CHECK(rsma.scheme == Scheme::RSMA);
  CHECK(sdma.scheme == Scheme::SDMA);
  CHECK(std::abs(rsma.user1_rate - sdma.user1_rate) <= 0.02 * sdma.user1_rate);
  CHECK(std::abs(rsma.user2_rate - sdma.user2_rate) <= 0.02 * sdma.user2_rate);
}

TEST_CASE("RSMA min rate is at least both baselines in every pair case") {
  ExperimentConfig cfg = mmse_config();
  cfg.workers = 1;
  const auto rows = run_pair_cases(default_pair_cases(), cfg, 20, 11);
  REQUIRE(rows.size() == 27);
  for (std::size_t c = 0; c < 9; ++c) {
    const double rsma = rows[3 * c].mean_min_rate;
    const double sdma = rows[3 * c + 1].mean_min_rate;
    const double noma = rows[3 * c + 2].mean_min_rate;
    CHECK(rsma >= std::max(sdma, noma) - 1e-9);
  }
  cfg.workers = 4;
  const auto again = run_pair_cases(default_pair_cases(), cfg, 20, 11);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].user1_rate == again[i].user1_rate);
    CHECK(rows[i].user2_rate == again[i].user2_rate);
  }
  CHECK_THROWS_AS(run_pair_cases({}, cfg, 20, 11), ConfigurationError);
}

TEST_CASE("overloaded traces: zig-zag SDMA, flat RSMA") {
  const OverloadedTrace t = run_overloaded(overloaded_reference_channels(20.0), 6);
  for (Index s = 0; s < 6; ++s) {
    const bool even = s % 2 == 0;
    CHECK((t.sdma(s, 0) > 0.0) == even);
    CHECK((t.sdma(s, 1) > 0.0) == even);
    CHECK((t.sdma(s, 2) > 0.0) == !even);
    CHECK((t.sdma(s, 3) > 0.0) == !even);
    CHECK(t.rsma.row(s) == t.rsma.row(0));
    CHECK(t.rsma_min(s) == t.rsma_min(0));
  }
  CHECK(t.rsma.row(0).minCoeff() > 0.0);
  CHECK(t.rsma_min(0) > t.sdma_time_averaged_min());
  CHECK(t.rsma_common_fraction > 0.0);
}

TEST_CASE("overloaded reference channels: hand evaluation at 20 dB") {
  // Independent evaluation of the reference geometry. SDMA pair {1,2}:
  // channels sqrt(10) e1 and [1,1]/sqrt(2); the ZF beams are e2-ish and e1-ish,
  // so compute them directly from the 2x2 inverse.
  const ChannelSet ch = overloaded_reference_channels(20.0);
  const double sigma2 = 0.01;
  CHECK(ch.noise_variance == doctest::Approx(sigma2));
  Eigen::Matrix2cd H;
  H.col(0) = ch.h(0);
  H.col(1) = ch.h(1);
  Eigen::Matrix2cd W = H.adjoint().inverse();
  double sdma_even[2];
  for (int k = 0; k < 2; ++k) {
    const double gain = std::norm(ch.h(k).dot(W.col(k).normalized()));
    sdma_even[k] = std::log2(1.0 + 0.5 * gain / sigma2);
  }
  const OverloadedTrace t = run_overloaded(ch, 2);
  CHECK(t.sdma(0, 0) == doctest::Approx(sdma_even[0]).epsilon(1e-12));
  CHECK(t.sdma(0, 1) == doctest::Approx(sdma_even[1]).epsilon(1e-12));
  // time-averaged: each user served half the time
  CHECK(t.sdma_time_averaged_min() == doctest::Approx(0.5 * std::min(sdma_even[0], sdma_even[1])));
}

TEST_CASE("overloaded rejects the wrong shape") {
  CHECK_THROWS_AS(run_overloaded(generate_iid(4, 3, 20.0, 1), 4), ConfigurationError);
  CHECK_THROWS_AS(run_overloaded(generate_iid(3, 2, 20.0, 1), 4), ConfigurationError);
  ExperimentConfig cfg;
  cfg.n_tx = 3;
  CHECK_THROWS_AS(run_overloaded(cfg, 4, 1), ConfigurationError);
  cfg.n_tx = 2;
  const OverloadedTrace a = run_overloaded(cfg, 4, 1);
  const OverloadedTrace b = run_overloaded(cfg, 4, 1);
  CHECK(a.rsma == b.rsma);
  CHECK(a.sdma == b.sdma);
}

TEST_CASE("K = 4 ZF with a forced correlated pair reaches the >100% region") {
  ExperimentConfig cfg;
  cfg.kinds = PrecoderChoice{PrivateKind::ZF, CommonKind::SV};
  cfg.n_tx = 4;
  cfg.forced_pair_rho_max = 0.2;
  cfg.power_grid_points = 51;
  const auto rows = run_percentile_gains(cfg, 4, 500, 7);
  bool weakest_gt100 = false;
  for (const auto& r : rows) {
    if (r.metric == PercentileMetric::WeakestUserRate) {
      weakest_gt100 = weakest_gt100 || r.gt100;
    }
  }
  CHECK(weakest_gt100);
}
