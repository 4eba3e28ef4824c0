#include "oracles.hpp"

#include "mfldp/bounds.hpp"
#include "mfldp/estimate.hpp"
#include "mfldp/lln.hpp"
#include "mfldp/optimize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace mfldp;

namespace {

JumpRateTable cw(double beta = 1.0) { return JumpRateTable(builtin_model("curie-weiss", {{"beta", beta}})); }

SimplexPoint cw_point(double u) { return SimplexPoint{1.0 - u, u}; }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

TEST(Gillespie, AbsorbedWhenAllRatesVanish) {
  const ModelSpec m(3, {make_transition(3, {1}, {2}, "0"), make_transition(3, {2}, {3}, "x1 * x3")}, false);
  const JumpRateTable t(m);
  Stream rng(1, 0);
  const auto s = gillespie_run(t, LatticePoint({0, 5, 5}, 10), 2.0, rng);
  EXPECT_EQ(s.jumps(), 0u);
  EXPECT_EQ(s.final_state(), LatticePoint({0, 5, 5}, 10));
}

TEST(Gillespie, StaysOnLatticeOneDirectionPerJump) {
  const JumpRateTable t(builtin_model("eg3"));
  Stream rng(7, 3);
  const auto s = gillespie_run(t, LatticePoint({10, 5, 3, 2}, 20), 2.0, rng);
  ASSERT_GT(s.jumps(), 10u);
  for (std::size_t m = 0; m + 1 < s.states(); ++m) {
    const auto a = s.counts_at(m), b = s.counts_at(m + 1);
    int total = 0;
    for (int i = 0; i < 4; ++i) {
      EXPECT_EQ(b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)], t.direction(s.directions[m])[i]);
      EXPECT_GE(b[static_cast<std::size_t>(i)], 0);
      total += b[static_cast<std::size_t>(i)];
    }
    EXPECT_EQ(total, 20);
    EXPECT_LT(s.times[m], s.times[m + 1]);
  }
  EXPECT_LT(s.times.back(), 2.0);
}

TEST(Gillespie, Deterministic) {
  const JumpRateTable t(builtin_model("arn"));
  const LatticePoint x0({10, 10, 10}, 30);
  Stream a(42, 9), b(42, 9), c(43, 9);
  const auto sa = gillespie_run(t, x0, 1.0, a);
  const auto sb = gillespie_run(t, x0, 1.0, b);
  const auto sc = gillespie_run(t, x0, 1.0, c);
  EXPECT_EQ(sa.times, sb.times);
  EXPECT_EQ(sa.counts, sb.counts);
  EXPECT_EQ(sa.directions, sb.directions);
  EXPECT_NE(sa.times, sc.times);
}

TEST(Gillespie, FirstHoldingTimeIsExponential) {
  const auto t = cw();
  const LatticePoint x0({30, 20}, 50);
  const double total = 50.0 * t.finite_rates(x0).sum();
  std::vector<double> first;
  for (std::size_t r = 0; r < 10000; ++r) {
    Stream rng(5, r);
    const auto s = gillespie_run(t, x0, 10.0, rng);
    ASSERT_GE(s.states(), 2u);
    first.push_back(s.times[1]);
  }
  EXPECT_LE(std::abs(mean(first) - 1.0 / total), 3.0 * standard_error(first));
}

TEST(Gillespie, FollowsMeanFieldAtLargeN) {
  const auto t = cw();
  const auto lln = integrate_lln(t, cw_point(0.5), 1.0).as_path();
  int close = 0;
  for (std::size_t seed = 0; seed < 20; ++seed) {
    Stream rng(seed, 0);
    close += sup_deviation(gillespie_run(t, LatticePoint::nearest(cw_point(0.5), 10000), 1.0, rng), lln) <= 0.03;
  }
  EXPECT_GE(close, 19);
}

TEST(Controlled, NominalFeedbackHasZeroWeight) {
  const JumpRateTable t(builtin_model("eg3"));
  const LatticePoint x0({4, 3, 2, 1}, 10);
  std::vector<double> xbuf(4);
  const FeedbackControl nominal = [&](double, std::span<const int> c, std::span<double> a) {
    t.finite_rates(10, c, xbuf, a);
  };
  for (std::size_t r = 0; r < 20; ++r) {
    Stream rng(11, r);
    const auto s = controlled_run(t, x0, 1.0, nominal, rng);
    EXPECT_NEAR(s.log_lr, 0.0, 1e-12);
    EXPECT_GT(s.path.jumps(), 0u);
  }
}

TEST(Controlled, ImportanceSamplingIsUnbiased) {
  const auto t = cw();
  const int n = 50;
  const auto target = cw_point(0.25);
  const auto opt = minimize_action(t, cw_point(0.5), target, 1.0);
  const auto event = [&](const TrajectorySample& s) { return s.counts_at(s.states() - 1)[0] >= 0.75 * n; };
  McConfig plain;
  plain.ns = {n};
  plain.reps = 40000;
  McConfig tilted = plain;
  tilted.reps = 10000;
  tilted.seed = 99;
  tilted.control = build_tilt_control(t, opt.best);
  const auto a = mc_rate_estimate(t, cw_point(0.5), 1.0, event, plain).rows.front();
  const auto b = mc_rate_estimate(t, cw_point(0.5), 1.0, event, tilted).rows.front();
  EXPECT_GT(a.p_hat, 3e-3);
  EXPECT_LT(a.p_hat, 3e-2);
  EXPECT_EQ(b.method, "is");
  EXPECT_LE(std::abs(a.p_hat - b.p_hat), 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST(Controlled, ExpectedCostMatchesControlledMeanField) {
  const auto t = cw();
  const auto opt = minimize_action(t, cw_point(0.5), cw_point(0.25), 1.0);
  const ControlSignal ctl = build_tilt_control(t, opt.best);
  auto cost_rate = [&](const Vec& x, std::size_t p) {
    const Vec lam = t.limit_rates(x);
    double c = 0.0;
    for (std::size_t v = 0; v < t.size(); ++v) {
      const double a = ctl.rates(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(p));
      c += lam[static_cast<Eigen::Index>(v)] * poisson_ell(a / lam[static_cast<Eigen::Index>(v)]);
    }
    return c;
  };
  // Controlled mean field: x' = sum_v v alpha_v(t), exact on each piece.
  double quad = 0.0;
  Vec x = cw_point(0.5).coords();
  for (std::size_t p = 0; p < ctl.pieces(); ++p) {
    const double dt = ctl.times[p + 1] - ctl.times[p];
    const Vec vel = t.direction_matrix() * ctl.rates.col(static_cast<Eigen::Index>(p));
    quad += dt * oracle::simpson([&](double s) { return cost_rate(x + s * vel, p); }, 0.0, dt, 20) / dt;
    x += dt * vel;
  }
  const int n = 2000;
  std::vector<double> costs;
  for (std::size_t r = 0; r < 200; ++r) {
    Stream rng(3, r);
    const auto s = controlled_run(t, LatticePoint::nearest(cw_point(0.5), n), 1.0, ctl, rng).path;
    double c = 0.0;
    for (std::size_t p = 0; p < ctl.pieces(); ++p) {
      double a = ctl.times[p];
      while (a < ctl.times[p + 1]) {
        const std::size_t m = s.index_at(a);
        const double b = std::min(ctl.times[p + 1], m + 1 < s.states() ? s.times[m + 1] : 1.0);
        c += (b - a) * cost_rate(s.coords_at(a), p);
        a = b;
      }
    }
    costs.push_back(c);
  }
  EXPECT_LE(std::abs(mean(costs) - quad), 3.0 * standard_error(costs) + 2.0 / n);
  EXPECT_NEAR(quad, opt.value(), 0.02 * opt.value());
}

TEST(TiltControl, MeanFieldPathGivesNominalRates) {
  const JumpRateTable t(builtin_model("eg3"));
  const auto lln = integrate_lln(t, SimplexPoint{0.4, 0.3, 0.2, 0.1}, 1.0, 0.02).as_path();
  const auto ctl = build_tilt_control(t, path_action(t, lln));
  EXPECT_EQ(ctl.pieces(), lln.segments());
  for (std::size_t m = 0; m < ctl.pieces(); ++m) {
    const Vec mid = 0.5 * (lln.knots()[m].coords() + lln.knots()[m + 1].coords());
    const Vec lam = t.limit_rates(mid);
    for (Eigen::Index v = 0; v < lam.size(); ++v)
      EXPECT_NEAR(ctl.rates(v, static_cast<Eigen::Index>(m)), std::max(lam[v], 1e-12), 2e-3 * (1.0 + lam[v]));
  }
}

TEST(TiltControl, BeatsPlainSamplingOnRareEvents) {
  const auto t = cw();
  const int n = 100;
  const auto opt = minimize_action(t, cw_point(0.5), cw_point(0.2), 1.0);
  const auto event = [&](const TrajectorySample& s) { return s.counts_at(s.states() - 1)[0] >= 0.8 * n; };
  McConfig c;
  c.ns = {n};
  c.reps = 10000;
  const auto plain = mc_rate_estimate(t, cw_point(0.5), 1.0, event, c).rows.front();
  c.control = build_tilt_control(t, opt.best);
  const auto is = mc_rate_estimate(t, cw_point(0.5), 1.0, event, c).rows.front();
  ASSERT_LE(is.p_hat, 1e-3);
  const double rel_is = is.std_error / is.p_hat;
  // Relative error of plain sampling at the same budget, from the binomial variance.
  const double rel_plain = std::sqrt((1.0 - is.p_hat) / (is.p_hat * static_cast<double>(c.reps)));
  EXPECT_LE(rel_is, 0.2 * rel_plain);
  EXPECT_LE(plain.hits, 5u);
}

TEST(Transient, LatticeIndexRoundTrip) {
  EXPECT_EQ(lattice_size(50, 2), 51u);
  EXPECT_EQ(lattice_size(10, 4), 286u);
  EXPECT_EQ(lattice_size(400, 2), 401u);
  const LatticeIndex idx(7, 4);
  ASSERT_EQ(idx.size(), lattice_size(7, 4));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto c = idx.counts(r);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), 0), 7);
    EXPECT_EQ(idx.rank(c), r);
  }
}

TEST(Transient, PointMassAtTimeZeroAndStochasticKernel) {
  const JumpRateTable t(builtin_model("eg3"));
  const LatticePoint x0({3, 3, 2, 2}, 10);
  const auto at0 = exact_transient(t, x0, 0.0);
  EXPECT_EQ(at0.probability(x0), 1.0);
  EXPECT_EQ(at0.result.p.sum(), 1.0);
  const auto at1 = exact_transient(t, x0, 1.0);
  EXPECT_LE(at1.result.kernel_row_error, 1e-14);
  EXPECT_LE(at1.result.truncation_error, 1e-12);
  EXPECT_NEAR(at1.result.p.sum(), 1.0, 1e-10);
  EXPECT_GE(at1.result.p.minCoeff(), 0.0);
  EXPECT_THROW(exact_transient(t, LatticePoint({100, 100, 100, 100}, 400), 1.0), DomainError);
}

TEST(Transient, AgreesWithGillespie) {
  const auto t = cw();
  const int n = 50;
  const LatticePoint x0 = LatticePoint::nearest(cw_point(0.5), n);
  const auto exact = exact_transient(t, x0, 1.0);
  const std::size_t reps = 100000;
  std::vector<int> hits(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream rng(17, r);
    ++hits[static_cast<std::size_t>(gillespie_run(t, x0, 1.0, rng).final_state()[1])];
  }
  for (int u : {10, 20, 25, 30, 40}) {
    const double p = exact.probability(LatticePoint({n - u, u}, n));
    const double f = static_cast<double>(hits[static_cast<std::size_t>(u)]) / reps;
    EXPECT_LE(std::abs(f - p), 4.0 * std::sqrt(p * (1.0 - p) / reps) + 1e-12) << u;
  }
}

TEST(Bounds, BirthChainExamples) {
  EXPECT_DOUBLE_EQ(birth_chain_bound(std::vector<double>{1.0}, 0.0, 1.0), 1.0);
  EXPECT_NEAR(birth_chain_bound(std::vector<double>{1.0, 1.0}, 2.0, 0.5), 0.125 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(birth_chain_bound(std::vector<double>{1.0, 1.0}, 2.0, 0.5), 0.0459849, 1e-7);
}

TEST(Bounds, BirthChainBelowExactProbability) {
  Stream rng(2024, 61);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 1 + static_cast<int>(rng() % 5);
    std::vector<double> b(static_cast<std::size_t>(N));
    for (double& r : b) r = 0.2 + 2.0 * rng.uniform();
    const double c = *std::max_element(b.begin(), b.end()) + 2.0 * rng.uniform();
    const double time = 0.1 + 2.0 * rng.uniform();
    // Forward rates b plus random extra jumps keeping every exit rate <= c.
    Mat Q = Mat::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
      double room = c;
      if (i < N) {
        Q(i, i + 1) = b[static_cast<std::size_t>(i)];
        room -= b[static_cast<std::size_t>(i)];
      }
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(N + 1));
      if (j != i && j != i + 1) Q(i, j) += room * rng.uniform();
      Q(i, i) = -Q.row(i).sum();
    }
    Vec p0 = Vec::Zero(N + 1);
    p0[0] = 1.0;
    const auto res = uniformize(Q.sparseView(), p0, time);
    EXPECT_GE(res.p[N] + 1e-12, birth_chain_bound(b, c, time)) << trial;
  }
}

TEST(Bounds, ExcursionBound) {
  const auto t = cw();
  const auto k = excursion_constants(t);
  EXPECT_NEAR(k.C1, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(k.C2, k.R * 2.0 * k.C1, 1e-15);
  // rho = e C2 makes lbar vanish.
  const double delta = 0.2;
  const double tau_e = delta / (2.0 * std::sqrt(2.0) * std::exp(1.0) * k.C2);
  EXPECT_NEAR(excursion_bound(t, 200, delta, tau_e), 4.0, 1e-12);
  const double tau = 0.1 * excursion_time_limit(t, delta);
  double prev = kInf;
  for (int n : {50, 100, 200, 400}) {
    const double b = excursion_bound(t, n, delta, tau);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(excursion_bound(t, 200, delta, 2.0 * excursion_time_limit(t, delta)), DomainError);

  for (double tt : {excursion_time_limit(t, delta), tau}) {
    const LatticePoint x0 = LatticePoint::nearest(cw_point(0.5), 200);
    std::size_t hits = 0;
    const std::size_t reps = 10000;
    for (std::size_t r = 0; r < reps; ++r) {
      Stream rng(8, r);
      const auto s = gillespie_run(t, x0, tt, rng);
      double worst = 0.0;
      for (std::size_t m = 0; m < s.states(); ++m) worst = std::max(worst, (s.coords_at(s.times[m]) - x0.coords()).norm());
      hits += worst >= delta;
    }
    EXPECT_LE(static_cast<double>(hits) / reps, excursion_bound(t, 200, delta, tt));
  }
}

TEST(Estimate, ExtrapolationRecoversCoefficients) {
  const std::vector<int> ns{50, 100, 200, 400};
  std::vector<double> decays;
  for (int n : ns) decays.push_back(0.3 + 1.5 / n - 0.7 * std::log(n) / n);
  const auto f = extrapolate_decay(ns, decays);
  EXPECT_NEAR(f.rate, 0.3, 1e-12);
  EXPECT_NEAR(f.inv_n, 1.5, 1e-9);
  EXPECT_NEAR(f.log_n_over_n, -0.7, 1e-9);
  EXPECT_THROW(extrapolate_decay(std::vector<int>{50, 50, 100}, std::vector<double>{1, 1, 1}), DomainError);
}

TEST(Estimate, CertainEventHasZeroDecay) {
  McConfig c;
  c.ns = {20, 40, 80};
  c.reps = 100;
  const auto est = mc_rate_estimate(cw(), cw_point(0.5), 0.5, [](const TrajectorySample&) { return true; }, c);
  for (const auto& r : est.rows) {
    EXPECT_EQ(r.p_hat, 1.0);
    EXPECT_EQ(r.decay, 0.0);
    EXPECT_EQ(r.std_error, 0.0);
  }
  ASSERT_TRUE(est.fit.has_value());
  EXPECT_NEAR(est.fit->rate, 0.0, 1e-12);
  c.reps = 99;
  EXPECT_THROW(mc_rate_estimate(cw(), cw_point(0.5), 0.5, [](const TrajectorySample&) { return true; }, c),
               DomainError);
}

TEST(Estimate, ImpossibleEventIsCensored) {
  McConfig c;
  c.ns = {20};
  c.reps = 100;
  const auto est = mc_rate_estimate(cw(), cw_point(0.5), 0.1, [](const TrajectorySample&) { return false; }, c);
  EXPECT_TRUE(est.rows.front().censored);
  EXPECT_FALSE(est.fit.has_value());
}

TEST(Estimate, PointEventUsesExactTransient) {
  McConfig c;
  c.ns = {50, 100, 200};
  const auto est = point_event_estimate(cw(), cw_point(0.5), cw_point(0.7), 0.75, c);
  for (const auto& r : est.rows) {
    EXPECT_EQ(r.method, "exact");
    EXPECT_GT(r.p_hat, 0.0);
  }
  ASSERT_TRUE(est.fit.has_value());
}
