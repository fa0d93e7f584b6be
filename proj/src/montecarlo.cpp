#include "rsma/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace rsma {

namespace {

unsigned resolve_workers(unsigned requested, long long n) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (n < static_cast<long long>(w)) {
    w = static_cast<unsigned>(std::max(1LL, n));
  }
  return w;
}

// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written to
// per-index slots; reduction happens afterwards in index order. The failure
// with the lowest index is rethrown, tagged with that index.
template <typename Fn>
void parallel_for(long long n, unsigned workers, Fn&& fn) {
  if (n <= 0) {
    return;
  }
  std::atomic<long long> next{0};
  std::mutex failure_mutex;
  long long failed_index = std::numeric_limits<long long>::max();
  std::exception_ptr failure;

  auto body = [&] {
    for (long long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  const unsigned w = resolve_workers(workers, n);
  if (w == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
      pool.emplace_back(body);
    }
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const ConfigurationError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(failed_index, e.what());
    }
  }
}

double percent_gain(double rsma, double sdma) { return 100.0 * (rsma - sdma) / sdma; }

std::pair<double, double> edge_range(const std::vector<double>& edges) { return {edges.front(), edges.back()}; }

ChannelSet select_users(const ChannelSet& ch, std::initializer_list<Index> users) {
  CMatrix H(ch.n_tx(), static_cast<Index>(users.size()));
  Index c = 0;
  for (Index u : users) {
    H.col(c++) = ch.h(u);
  }
  return ChannelSet{std::move(H), ch.noise_variance, ch.tx_power};
}

}  // namespace

void validate_edges(const std::vector<double>& rho_edges, const std::vector<double>& alpha_edges) {
  auto ascending = [](const std::vector<double>& e) {
    return e.size() >= 2 && std::adjacent_find(e.begin(), e.end(), std::greater_equal<>()) == e.end();
  };
  if (!ascending(rho_edges) || rho_edges.front() < 0.0 || rho_edges.back() > 1.0) {
    throw ConfigurationError("rho_edges must be >= 2 strictly ascending values in [0, 1]");
  }
  if (!ascending(alpha_edges) || alpha_edges.back() > 0.0) {
    throw ConfigurationError("alpha_edges must be >= 2 strictly ascending values <= 0");
  }
}

std::optional<std::pair<Index, Index>> BinGrid::locate(double rho, double alpha_db) const {
  const Index nr = rho_bins();
  const Index na = alpha_bins();
  if (rho < rho_edges.front() || rho > rho_edges.back() || alpha_db < alpha_edges.front() ||
      alpha_db > alpha_edges.back()) {
    return std::nullopt;
  }
  Index r = 0;
  while (r + 1 < nr && rho >= rho_edges[static_cast<std::size_t>(r + 1)]) {
    ++r;
  }
  Index a = 0;
  while (a + 1 < na && alpha_db > alpha_edges[static_cast<std::size_t>(a + 1)]) {
    ++a;
  }
  return std::make_pair(r, a);
}

DropResult evaluate_pair_drop(const ChannelSet& ch, const ExperimentConfig& cfg, long long drop_index,
                              const PairGeometry& geometry) {
  DropResult d;
  d.drop_index = drop_index;
  d.geometry = geometry;
  const CMatrix privates = private_precoders(ch, cfg.kinds.private_kind);
  d.sdma = sdma_rates(ch, split_power(privates, std::nullopt, ch.tx_power, 0.0));
  const CVector common = common_precoder(ch, cfg.kinds.common_kind);
  const PrecoderSet pre = allocate_power(ch, privates, common, cfg.power_grid_points);
  d.rsma = rsma_rates(ch, pre, cfg.policy);

  const Index w = weak_user(ch);
  const Index s = 1 - w;
  const double sw = d.sdma.user_totals(w);
  const double ss = d.sdma.user_totals(s);
  d.excluded = sw < kGainDenominatorFloor || ss < kGainDenominatorFloor || d.sdma.sum_rate < kGainDenominatorFloor;
  if (!d.excluded) {
    d.gain_weak = percent_gain(d.rsma.user_totals(w), sw);
    d.gain_strong = percent_gain(d.rsma.user_totals(s), ss);
    d.gain_sum = percent_gain(d.rsma.sum_rate, d.sdma.sum_rate);
  }
  return d;
}

BinGrid aggregate_bins(const std::vector<DropResult>& drops, const std::vector<double>& rho_edges,
                       const std::vector<double>& alpha_edges) {
  validate_edges(rho_edges, alpha_edges);
  BinGrid grid{rho_edges, alpha_edges, {}};
  grid.cells.assign(static_cast<std::size_t>(grid.rho_bins() * grid.alpha_bins()), GainCell{});
  for (const auto& d : drops) {
    const auto cell = grid.locate(d.geometry.rho, d.geometry.alpha_db);
    if (!cell) {
      continue;
    }
    GainCell& c = grid.at(cell->first, cell->second);
    ++c.n;
    if (d.excluded) {
      ++c.n_excluded;
      continue;
    }
    c.g_w += d.gain_weak;
    c.g_s += d.gain_strong;
    c.g_sum += d.gain_sum;
  }
  for (auto& c : grid.cells) {
    const long long used = c.n - c.n_excluded;
    if (c.n < kMinDropsPerCell || used == 0) {
      c.g_w = c.g_s = c.g_sum = 0.0;
      continue;
    }
    c.g_w /= static_cast<double>(used);
    c.g_s /= static_cast<double>(used);
    c.g_sum /= static_cast<double>(used);
  }
  return grid;
}

BinGrid run_binned_gains(const ExperimentConfig& cfg, long long n_drops, std::uint64_t seed) {
  validate_edges(cfg.rho_edges, cfg.alpha_edges);
  const auto [rho_lo, rho_hi] = edge_range(cfg.rho_edges);
  const auto [alpha_lo, alpha_hi] = edge_range(cfg.alpha_edges);

  std::vector<DropResult> drops(static_cast<std::size_t>(std::max(0LL, n_drops)));
  parallel_for(n_drops, cfg.workers, [&](long long i) {
    const std::uint64_t drop_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(drop_seed);
    PairGeometry geom;
    geom.rho = rng.uniform(rho_lo, rho_hi);
    geom.alpha_db = rng.uniform(alpha_lo, alpha_hi);
    const ChannelSet ch = generate_pair(geom, cfg.n_tx, cfg.snr_db, derive_seed(drop_seed, 1), cfg.tx_power);
    drops[static_cast<std::size_t>(i)] = evaluate_pair_drop(ch, cfg, i, geom);
  });
  return aggregate_bins(drops, cfg.rho_edges, cfg.alpha_edges);
}

double nearest_rank(std::vector<double> values, double percentile) {
  if (values.empty()) {
    throw ConfigurationError("nearest_rank: empty sample");
  }
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ConfigurationError("nearest_rank: percentile must lie in (0, 100]");
  }
  const auto n = static_cast<long long>(values.size());
  long long rank = static_cast<long long>(std::ceil(percentile * static_cast<double>(n) / 100.0));
  rank = std::clamp(rank, 1LL, n);
  auto nth = values.begin() + (rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

std::string_view to_string(PercentileMetric metric) {
  return metric == PercentileMetric::UserRate ? "user_rate" : "weakest_user_rate";
}

PercentileRow percentile_gain(const std::vector<double>& sdma, const std::vector<double>& rsma, double percentile,
                              PercentileMetric metric) {
  PercentileRow row;
  row.percentile = percentile;
  row.metric = metric;
  row.sdma_value = nearest_rank(sdma, percentile);
  row.rsma_value = nearest_rank(rsma, percentile);
  if (row.sdma_value < kPercentileSentinelFloor) {
    row.gain_pct = 100.0;
    row.gt100 = row.rsma_value > row.sdma_value;
  } else {
    row.gain_pct = percent_gain(row.rsma_value, row.sdma_value);
    row.gt100 = row.gain_pct > 100.0;
  }
  return row;
}

std::vector<PercentileRow> run_percentile_gains(const ExperimentConfig& cfg, Index n_users, long long n_drops,
                                                std::uint64_t seed) {
  if (n_users != 2 && n_users != 4) {
    throw ConfigurationError("run_percentile_gains: n_users must be 2 or 4");
  }
  if (n_drops < 100) {
    throw ConfigurationError("run_percentile_gains: need at least 100 drops");
  }
  const auto K = static_cast<std::size_t>(n_users);
  const auto N = static_cast<std::size_t>(n_drops);
  std::vector<double> sdma_users(N * K), rsma_users(N * K), sdma_weakest(N), rsma_weakest(N);

  parallel_for(n_drops, cfg.workers, [&](long long i) {
    const std::uint64_t drop_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    ChannelSet ch = generate_iid(n_users, cfg.n_tx, cfg.snr_db, drop_seed, cfg.tx_power);
    if (cfg.forced_pair_rho_max) {
      Rng rng(derive_seed(drop_seed, 1));
      const double rho = rng.uniform(0.0, *cfg.forced_pair_rho_max);
      const CVector ref = ch.h(0);
      ch.channels.col(1) = correlated_partner(ref, rho, ch.h(1).squaredNorm(), rng);
    }
    const CMatrix privates = private_precoders(ch, cfg.kinds.private_kind);
    const RateReport sdma = sdma_rates(ch, split_power(privates, std::nullopt, ch.tx_power, 0.0));
    const PrecoderSet pre =
        allocate_power(ch, privates, common_precoder(ch, cfg.kinds.common_kind), cfg.power_grid_points);
    const RateReport rsma = rsma_rates(ch, pre, cfg.policy);
    const auto idx = static_cast<std::size_t>(i);
    for (std::size_t k = 0; k < K; ++k) {
      sdma_users[idx * K + k] = sdma.user_totals(static_cast<Index>(k));
      rsma_users[idx * K + k] = rsma.user_totals(static_cast<Index>(k));
    }
    sdma_weakest[idx] = sdma.min_rate();
    rsma_weakest[idx] = rsma.min_rate();
  });

  std::vector<PercentileRow> rows;
  for (double p : {5.0, 50.0}) {
    rows.push_back(percentile_gain(sdma_users, rsma_users, p, PercentileMetric::UserRate));
    rows.push_back(percentile_gain(sdma_weakest, rsma_weakest, p, PercentileMetric::WeakestUserRate));
  }
  return rows;
}

std::vector<PairGeometry> default_pair_cases() {
  std::vector<PairGeometry> cases;
  for (double rho : {0.1, 0.5, 0.9}) {
    for (double alpha : {0.0, -5.0, -10.0}) {
      cases.push_back(PairGeometry{rho, alpha});
    }
  }
  return cases;
}

namespace {

struct PairDropRates {
  RVector sdma, noma, rsma;  // user totals
};

PairDropRates evaluate_pair_case_drop(const ChannelSet& ch, const ExperimentConfig& cfg) {
  const int grid = cfg.power_grid_points;
  const CMatrix privates = private_precoders(ch, cfg.kinds.private_kind);
  PairDropRates out;
  out.sdma = sdma_rates(ch, split_power(privates, std::nullopt, ch.tx_power, 0.0)).user_totals;

  // NOMA shares the multicast beam; the split is searched for the best minimum.
  const CVector shared = common_precoder(ch, CommonKind::MaxMin);
  double noma_best = -1.0;
  for (int i = 0; i < grid; ++i) {
    const RateReport rep = noma_rates(ch, static_cast<double>(i) / (grid - 1), shared);
    if (rep.min_rate() > noma_best) {
      noma_best = rep.min_rate();
      out.noma = rep.user_totals;
    }
  }

  const PrecoderSet split =
      allocate_power(ch, privates, common_precoder(ch, cfg.kinds.common_kind), grid, SplitObjective::MinUserRate);
  RateReport best = rsma_rates(ch, split, AllocationPolicy::MaxMin);

  // NOMA written as RSMA: strong user fully private, weak user fully common,
  // both on the shared beam.
  const Index s = strong_user(ch);
  PrecoderSet noma_like;
  noma_like.common = shared;
  noma_like.private_beams = CMatrix(ch.n_tx(), 2);
  noma_like.private_beams.col(0) = shared;
  noma_like.private_beams.col(1) = shared;
  noma_like.power_private = RVector::Zero(2);
  const LinkGains gains = LinkGains::of(ch, noma_like);
  for (int i = 0; i < grid; ++i) {
    const double a = static_cast<double>(i) / (grid - 1);
    RVector pp = RVector::Zero(2);
    pp(s) = (1.0 - a) * ch.tx_power;
    const RateReport rep = rsma_rates(gains, a * ch.tx_power, pp, 0.0, AllocationPolicy::MaxMin);
    if (rep.min_rate() > best.min_rate()) {
      best = rep;
    }
  }
  out.rsma = best.user_totals;
  return out;
}

}  // namespace

std::vector<PairCaseRow> run_pair_cases(const std::vector<PairGeometry>& cases, const ExperimentConfig& cfg,
                                        long long n_drops, std::uint64_t seed) {
  if (cases.empty()) {
    throw ConfigurationError("run_pair_cases: no cases");
  }
  if (n_drops < 1) {
    throw ConfigurationError("run_pair_cases: need at least one drop per case");
  }
  for (const auto& c : cases) {
    c.validate();
  }
  const auto n_cases = static_cast<long long>(cases.size());
  std::vector<PairDropRates> results(static_cast<std::size_t>(n_cases * n_drops));
  parallel_for(n_cases * n_drops, cfg.workers, [&](long long flat) {
    const long long c = flat / n_drops;
    const long long d = flat % n_drops;
    const std::uint64_t drop_seed =
        derive_seed(derive_seed(seed, static_cast<std::uint64_t>(c)), static_cast<std::uint64_t>(d));
    const ChannelSet ch =
        generate_pair(cases[static_cast<std::size_t>(c)], cfg.n_tx, cfg.snr_db, drop_seed, cfg.tx_power);
    results[static_cast<std::size_t>(flat)] = evaluate_pair_case_drop(ch, cfg);
  });

  std::vector<PairCaseRow> rows;
  const Scheme order[] = {Scheme::RSMA, Scheme::SDMA, Scheme::NOMA};
  for (long long c = 0; c < n_cases; ++c) {
    for (Scheme scheme : order) {
      PairCaseRow row;
      row.case_id = static_cast<int>(c) + 1;
      row.geometry = cases[static_cast<std::size_t>(c)];
      row.scheme = scheme;
      for (long long d = 0; d < n_drops; ++d) {
        const PairDropRates& r = results[static_cast<std::size_t>(c * n_drops + d)];
        const RVector& u = scheme == Scheme::RSMA ? r.rsma : scheme == Scheme::SDMA ? r.sdma : r.noma;
        row.user1_rate += u(0);
        row.user2_rate += u(1);
        row.mean_min_rate += u.minCoeff();
      }
      const auto n = static_cast<double>(n_drops);
      row.user1_rate /= n;
      row.user2_rate /= n;
      row.mean_min_rate /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

OverloadedTrace run_overloaded(const ChannelSet& ch, long long n_slots, int grid_points) {
  if (ch.n_tx() != 2 || ch.n_users() != 4) {
    throw ConfigurationError("run_overloaded: needs n_tx = 2 and K = 4, got n_tx = " + std::to_string(ch.n_tx()) +
                             ", K = " + std::to_string(ch.n_users()));
  }
  if (n_slots < 1) {
    throw ConfigurationError("run_overloaded: need at least one slot");
  }
  if (grid_points < 2) {
    throw ConfigurationError("run_overloaded: power grid needs at least 2 points");
  }
  const double P = ch.tx_power;

  // SDMA: one ZF pair per slot.
  auto serve_pair = [&](Index a, Index b) {
    const ChannelSet sub = select_users(ch, {a, b});
    return sdma_rates(sub, split_power(private_precoders(sub, PrivateKind::ZF), std::nullopt, P, 0.0)).user_totals;
  };
  const RVector even = serve_pair(0, 1);
  const RVector odd = serve_pair(2, 3);

  // RSMA: ZF privates for users 1 and 4, users 2 and 3 only on the common stream.
  const ChannelSet outer = select_users(ch, {0, 3});
  const CMatrix zf = private_precoders(outer, PrivateKind::ZF);
  const CVector common = common_precoder(ch, CommonKind::SV);
  PrecoderSet pre;
  pre.common = common;
  pre.private_beams = CMatrix(2, 4);
  pre.private_beams << zf.col(0), common, common, zf.col(1);
  pre.power_private = RVector::Zero(4);
  const LinkGains gains = LinkGains::of(ch, pre);

  auto evaluate = [&](double t) {
    RVector pp = RVector::Zero(4);
    pp(0) = pp(3) = (1.0 - t) * P / 2.0;
    const RateReport rep = rsma_rates(gains, t * P, pp, 0.0, AllocationPolicy::MaxMin);
    const RVector inner = allocate_common(rep.common_rate, RVector::Zero(2), AllocationPolicy::MaxMin);
    RVector totals(4);
    totals << rep.private_rates(0), inner(0), inner(1), rep.private_rates(3);
    return totals;
  };
  double best_t = 0.0;
  RVector best = evaluate(0.0);
  for (int i = 1; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / (grid_points - 1);
    RVector totals = evaluate(t);
    if (totals.minCoeff() > best.minCoeff()) {
      best = std::move(totals);
      best_t = t;
    }
  }

  OverloadedTrace trace;
  trace.rsma_common_fraction = best_t;
  trace.sdma = Eigen::MatrixXd::Zero(n_slots, 4);
  trace.rsma = Eigen::MatrixXd::Zero(n_slots, 4);
  trace.sdma_min = RVector(n_slots);
  trace.rsma_min = RVector(n_slots);
  for (Index s = 0; s < n_slots; ++s) {
    if (s % 2 == 0) {
      trace.sdma(s, 0) = even(0);
      trace.sdma(s, 1) = even(1);
      trace.sdma_min(s) = even.minCoeff();
    } else {
      trace.sdma(s, 2) = odd(0);
      trace.sdma(s, 3) = odd(1);
      trace.sdma_min(s) = odd.minCoeff();
    }
    trace.rsma.row(s) = best.transpose();
    trace.rsma_min(s) = best.minCoeff();
  }
  return trace;
}

OverloadedTrace run_overloaded(const ExperimentConfig& cfg, long long n_slots, std::uint64_t seed) {
  if (cfg.n_tx != 2) {
    throw ConfigurationError("run_overloaded: needs n_tx = 2, got " + std::to_string(cfg.n_tx));
  }
  const ChannelSet ch = generate_iid(4, cfg.n_tx, cfg.snr_db, derive_seed(seed, 0), cfg.tx_power);
  return run_overloaded(ch, n_slots, cfg.power_grid_points);
}

ChannelSet overloaded_reference_channels(double snr_db) {
  const double strong = std::sqrt(10.0);
  const double diag = 1.0 / std::sqrt(2.0);
  CMatrix H(2, 4);
  H << strong, diag, diag, 0.0,
       0.0,    diag, diag, strong;
  return make_channel_set(std::move(H), noise_variance_for_snr(snr_db, 1.0), 1.0);
}

}  // namespace rsma
