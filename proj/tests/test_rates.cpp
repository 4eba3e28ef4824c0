#include "mfldp/grid.hpp"
#include "mfldp/rates.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace mfldp;

namespace {

std::vector<std::vector<int>> compositions(int n, int d) {
  if (d == 1) return {{n}};
  std::vector<std::vector<int>> out;
  for (int c = 0; c <= n; ++c)
    for (auto rest : compositions(n - c, d - 1)) {
      rest.insert(rest.begin(), c);
      out.push_back(rest);
    }
  return out;
}

std::vector<std::vector<int>> tuples(int k, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(static_cast<std::size_t>(k), 0);
  for (;;) {
    out.push_back(t);
    int p = k - 1;
    while (p >= 0 && ++t[p] == d) t[p--] = 0;
    if (p < 0) return out;
  }
}

double rate_for(const JumpRateTable& table, const Vec& rates, IVec v) {
  const auto idx = table.find(v);
  return idx ? rates[static_cast<Eigen::Index>(*idx)] : 0.0;
}

IVec dir(std::initializer_list<int> c) {
  IVec v(static_cast<Eigen::Index>(c.size()));
  int i = 0;
  for (int x : c) v[i++] = x;
  return v;
}

}  // namespace

TEST(TupleCount, Examples) {
  EXPECT_EQ(tuple_count(3, std::vector<int>{0, 0}, LatticePoint({2, 1}, 3)), 2u);
  EXPECT_EQ(tuple_count(5, std::vector<int>{0, 1}, LatticePoint({2, 3}, 5)), 6u);
  EXPECT_EQ(tuple_count(2, std::vector<int>{0, 0, 0}, LatticePoint({2, 0}, 2)), 0u);
  EXPECT_THROW(tuple_count(4, std::vector<int>{0}, LatticePoint({2, 1}, 3)), DomainError);
}

TEST(TupleCount, MatchesBruteForceEnumeration) {
  for (int n = 1; n <= 8; ++n)
    for (const auto& counts : compositions(n, 3))
      for (int k = 1; k <= 3; ++k)
        for (const auto& t : tuples(k, 3))
          ASSERT_EQ(tuple_count(n, t, LatticePoint(counts, n)), oracle::enumerate_tuples(counts, t))
              << "n=" << n << " k=" << k;
}

TEST(FiniteRates, CurieWeissSmallPopulation) {
  const JumpRateTable cw(builtin_model("curie-weiss", {{"beta", 1.0}}));
  const Vec r = cw.finite_rates(LatticePoint({2, 2}, 4));
  EXPECT_NEAR(rate_for(cw, r, dir({-1, 1})), 0.5, 1e-15);
  EXPECT_NEAR(rate_for(cw, r, dir({1, -1})), 0.5, 1e-15);
}

TEST(FiniteRates, Eg3PairTransitionWithPermutedCopy) {
  const double c5 = 1.3;
  const JumpRateTable eg3(builtin_model("eg3", {{"c5", c5}}));
  const Vec r = eg3.finite_rates(LatticePoint({1, 1, 1, 1}, 4));
  EXPECT_NEAR(rate_for(eg3, r, dir({-1, -1, 1, 1})), c5 / 16.0, 1e-15);
}

TEST(FiniteRates, VanishAtVertexWhenSourceEmpty) {
  const JumpRateTable eg3(builtin_model("eg3"));
  const Vec r = eg3.finite_rates(LatticePoint({5, 0, 0, 0}, 5));
  EXPECT_EQ(rate_for(eg3, r, dir({-1, -1, 1, 1})), 0.0);
  EXPECT_EQ(rate_for(eg3, r, dir({1, -1, 0, 0})), 0.0);
  EXPECT_GT(rate_for(eg3, r, dir({-1, 1, 0, 0})), 0.0);
}

TEST(FiniteRates, TotalIntensityMatchesLabeledSystem) {
  for (const auto& m : {builtin_model("curie-weiss", {{"beta", 0.7}}), builtin_model("eg3", {{"c5", 2.0}, {"c6", 0.3}}),
                        builtin_model("arn", {{"gamma", 1.5}, {"C", 2}})}) {
    const JumpRateTable table(m);
    for (int n : {3, 5, 6})
      for (const auto& counts : compositions(n, m.d())) {
        const double lhs = n * table.finite_rates(LatticePoint(counts, n)).sum();
        EXPECT_NEAR(lhs, oracle::total_intensity(m, counts), 1e-12 * std::max(1.0, lhs)) << m.name() << " n=" << n;
      }
  }
}

TEST(LimitRates, CurieWeiss) {
  const JumpRateTable cw(builtin_model("curie-weiss", {{"beta", 1.0}}));
  const Vec r = cw.limit_rates(Vec((Vec(2) << 0.3, 0.7).finished()));
  EXPECT_NEAR(rate_for(cw, r, dir({1, -1})), 0.7 * std::exp(-0.8), 1e-15);
  EXPECT_NEAR(rate_for(cw, r, dir({1, -1})), 0.314530, 1e-6);
  EXPECT_NEAR(rate_for(cw, r, dir({-1, 1})), 0.3, 1e-15);
  const Vec b = cw.limit_rates(SimplexPoint::barycenter(2).coords());
  EXPECT_DOUBLE_EQ(b[0], 0.5);
  EXPECT_DOUBLE_EQ(b[1], 0.5);
}

TEST(LimitRates, Eg3) {
  const ParamMap p{{"c1", 1.1}, {"c2", 1.2}, {"c3", 1.3}, {"c4", 1.4}, {"c5", 1.5}, {"c6", 1.6}};
  const JumpRateTable eg3(builtin_model("eg3", p));
  EXPECT_EQ(eg3.size(), 6u);
  const Vec x = (Vec(4) << 0.1, 0.2, 0.3, 0.4).finished();
  const Vec r = eg3.limit_rates(x);
  EXPECT_NEAR(rate_for(eg3, r, dir({-1, 1, 0, 0})), 0.1 * 1.1, 1e-15);
  EXPECT_NEAR(rate_for(eg3, r, dir({1, -1, 0, 0})), 0.2 * 1.2, 1e-15);
  EXPECT_NEAR(rate_for(eg3, r, dir({0, 0, -1, 1})), 0.3 * 1.3, 1e-15);
  EXPECT_NEAR(rate_for(eg3, r, dir({0, 0, 1, -1})), 0.4 * 1.4, 1e-15);
  // Both orderings of the pair transition contribute x1 x2 c5 / 2! each.
  EXPECT_NEAR(rate_for(eg3, r, dir({-1, -1, 1, 1})), 0.1 * 0.2 * 1.5, 1e-15);
  EXPECT_NEAR(rate_for(eg3, r, dir({1, 1, -1, -1})), 0.3 * 0.4 * 1.6, 1e-15);
}

TEST(LimitRates, SymmetrizationMatchesExplicitExpansion) {
  // k <= 3 transitions with repeated states so the stabilizers are nontrivial.
  const ModelSpec m(4,
                    {make_transition(4, {1, 2}, {3, 4}, "1 + x1"), make_transition(4, {1, 1}, {2, 3}, "2"),
                     make_transition(4, {2, 2, 4}, {1, 1, 3}, "exp(x4)"), make_transition(4, {1, 2, 3}, {2, 3, 4}, "0.5"),
                     make_transition(4, {3, 3, 3}, {4, 4, 4}, "x2 + 0.1"), make_transition(4, {4}, {1}, "1")},
                    true);
  const JumpRateTable sym(m);
  const JumpRateTable expanded(oracle::expand_symmetrization(m));
  ASSERT_EQ(sym.size(), expanded.size());
  for (const auto& x : validation_grid(4, 40)) {
    const Vec a = sym.limit_rates(x.coords());
    const Vec b = expanded.limit_rates(x.coords());
    for (std::size_t v = 0; v < sym.size(); ++v)
      EXPECT_NEAR(a[static_cast<Eigen::Index>(v)], rate_for(expanded, b, sym.direction(v)), 1e-14);
  }
  for (int n : {6, 9})
    for (const auto& counts : compositions(n, 4)) {
      const Vec a = sym.finite_rates(LatticePoint(counts, n));
      const Vec b = expanded.finite_rates(LatticePoint(counts, n));
      for (std::size_t v = 0; v < sym.size(); ++v)
        EXPECT_NEAR(a[static_cast<Eigen::Index>(v)], rate_for(expanded, b, sym.direction(v)), 1e-14);
    }
}

TEST(LimitRates, IdenticallyZeroFamiliesAreExcluded) {
  const JumpRateTable t(builtin_model("eg3", {{"c5", 0.0}, {"c6", 0.0}}));
  EXPECT_EQ(t.size(), 4u);
  EXPECT_FALSE(t.find(dir({-1, -1, 1, 1})).has_value());
  EXPECT_EQ(t.zero_transitions().size(), 2u);
  const ModelSpec null_dir(2, {make_transition(2, {1, 2}, {2, 1}, "1"), make_transition(2, {1}, {2}, "1")}, false);
  EXPECT_EQ(JumpRateTable(null_dir).size(), 1u);
}

TEST(LimitRates, FiniteRatesConvergeAtRateOneOverN) {
  // x on the 1/100 lattice, so x_n = x for every n divisible by 100 and the
  // whole gap comes from the finite-population rates.
  for (const auto& m : {builtin_model("curie-weiss", {{"beta", 1.0}}), builtin_model("eg3"),
                        builtin_model("arn", {{"gamma", 1.0}, {"C", 2}})}) {
    const JumpRateTable table(m);
    Stream rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const LatticePoint x100 = LatticePoint::nearest(random_simplex_point(m.d(), rng), 100);
      const Vec lim = table.limit_rates(x100.coords());
      auto err = [&](int n) {
        std::vector<int> counts = x100.counts();
        for (auto& c : counts) c *= n / 100;
        return (table.finite_rates(LatticePoint(counts, n)) - lim).cwiseAbs().maxCoeff();
      };
      const double c = 100.0 * err(100);
      for (int n : {1000, 10000}) EXPECT_LE(err(n), c / n * (1 + 1e-9) + 1e-15) << m.name() << " n=" << n;
    }
  }
}

TEST(LimitRates, FiniteRatesApproachLimitAlongLatticeSequence) {
  const JumpRateTable table(builtin_model("arn", {{"gamma", 1.0}, {"C", 3}}));
  const SimplexPoint x{0.1234, 0.3456, 0.2, 0.331};
  const Vec lim = table.limit_rates(x.coords());
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {100, 1000, 10000, 100000}) {
    const double e = (table.finite_rates(LatticePoint::nearest(x, n)) - lim).cwiseAbs().maxCoeff();
    EXPECT_LT(e, 20.0 / n);
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(EffectiveMatrix, ReproducesLlnDrift) {
  for (const auto& m : {builtin_model("curie-weiss", {{"beta", 1.0}}), builtin_model("eg3", {{"c5", 2.0}}),
                        builtin_model("arn", {{"gamma", 1.3}, {"C", 3}})}) {
    const JumpRateTable table(m);
    for (const auto& x : validation_grid(m.d())) {
      const Mat g = table.effective_matrix(x.coords());
      const Vec lhs = g.transpose() * x.coords();
      EXPECT_LE((lhs - table.drift(x.coords())).cwiseAbs().maxCoeff(), 1e-12) << m.name();
      EXPECT_LE(g.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(EffectiveMatrix, Eg3Entries) {
  const JumpRateTable t(builtin_model("eg3", {{"c1", 1.1}, {"c5", 1.5}, {"c6", 1.6}}));
  const Vec x = (Vec(4) << 0.1, 0.2, 0.3, 0.4).finished();
  const Mat g = effective_matrix(t, SimplexPoint(x));
  EXPECT_NEAR(g(0, 1), 1.1, 1e-15);
  EXPECT_NEAR(g(0, 2), 0.2 * 1.5, 1e-15);
  EXPECT_NEAR(g(2, 0), 0.4 * 1.6, 1e-15);
  EXPECT_NEAR(g(1, 3), 0.1 * 1.5, 1e-15);
  EXPECT_NEAR(g(3, 1), 0.3 * 1.6, 1e-15);
  EXPECT_EQ(g(0, 3), 0.0);
}

TEST(EffectiveMatrix, ArnEntries) {
  // gamma = 1, C = 2, occupancy fractions (x0, x1, x2) = (0.7, 0.2, 0.1).
  const JumpRateTable t(builtin_model("arn", {{"gamma", 1.0}, {"C", 2}}));
  const Vec x = (Vec(3) << 0.7, 0.2, 0.1).finished();
  const Mat g = t.effective_matrix(x);
  const double up = 1.0 * (1.0 + 0.1 * (1.0 - 0.1));
  EXPECT_NEAR(g(0, 1), up, 1e-15);
  EXPECT_NEAR(g(1, 2), up, 1e-15);
  EXPECT_NEAR(g(1, 2), 1.09, 1e-14);
  EXPECT_NEAR(g(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(2, 1), 2.0, 1e-15);
  const Mat g1 = t.single_transition_matrix(x);
  EXPECT_NEAR(g1(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(g1(2, 1), 2.0, 1e-15);
}

TEST(RateEstimates, CurieWeissHasNoViolations) {
  const auto rep = rate_estimate_report(JumpRateTable(builtin_model("curie-weiss", {{"beta", 1.0}})));
  EXPECT_TRUE(rep.violations.empty()) << rep.violations.front().check;
  EXPECT_NEAR(rep.c0, std::exp(-2.0), 1e-12);
  EXPECT_GT(rep.c_bar_lower, 0.0);
  EXPECT_LE(rep.c_hat, 1.0 + 1e-12);
}

TEST(RateEstimates, Eg3ProductBoundAtVertex) {
  const JumpRateTable t(builtin_model("eg3"));
  const auto rep = rate_estimate_report(t);
  EXPECT_TRUE(rep.violations.empty());
  const Vec r = t.limit_rates(SimplexPoint::vertex(4, 0).coords());
  EXPECT_EQ(rate_for(t, r, dir({-1, -1, 1, 1})), 0.0);
}

TEST(RateEstimates, MixedFamilyFlagged) {
  // Rate vanishing in the interior of a face breaks the product lower bound.
  const ModelSpec m(2, {make_transition(2, {1}, {2}, "abs(x1 - 0.5)"), make_transition(2, {2}, {1}, "1")}, false);
  const auto rep = rate_estimate_report(JumpRateTable(m));
  EXPECT_FALSE(rep.violations.empty());
}
