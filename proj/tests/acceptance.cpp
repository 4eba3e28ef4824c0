// End-to-end acceptance checks. One line per criterion; exit status 1 if any fails.

#include "experiments.hpp"

#include "mfldp/estimate.hpp"
#include "mfldp/grid.hpp"
#include "mfldp/lln.hpp"
#include "mfldp/optimize.hpp"
#include "mfldp/parallel.hpp"
#include "mfldp/rate_function.hpp"
#include "mfldp/structure.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace mfldp;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

SimplexPoint cw_point(double u) { return SimplexPoint{1.0 - u, u}; }

JumpRateTable cw() { return JumpRateTable(builtin_model("curie-weiss", {{"beta", 1.0}})); }

Outcome dual_primal() {
  std::size_t pairs = 0, bad = 0;
  double worst = 0.0;
  Stream rng(2024, 1);
  std::normal_distribution<double> normal;
  for (const auto& name : builtin_names()) {
    const JumpRateTable t(builtin_model(name));
    const int d = t.d();
    for (int r = 0; r < 200; ++r) {
      const SimplexPoint x = random_simplex_point(d, rng, 0.05);
      Vec beta(d);
      for (int i = 0; i < d; ++i) beta[i] = normal(rng);
      beta.array() -= beta.mean();
      beta *= r % 3 == 0 ? 3.0 : 0.8;
      const auto dual = local_rate(t, x, beta);
      const auto primal = local_rate_primal(t, x, beta);
      ++pairs;
      const bool same_inf = dual.status == SolveStatus::Infinite && primal.status == SolveStatus::Infinite;
      if (same_inf) continue;
      const double diff = dual.finite() && primal.finite() ? std::abs(dual.value - primal.value) : kInf;
      worst = std::max(worst, diff);
      bad += !(diff <= 1e-6);
    }
  }
  return {bad == 0, fmt("%zu pairs, %zu above 1e-6, worst |dual - primal| = %.3g", pairs, bad, worst)};
}

Outcome point_event() {
  cli::ExperimentConfig c;
  c.name = "ldp-point-event";
  c.x0 = cw_point(0.5);
  c.target = SimplexPoint{0.3, 0.7};
  c.t = 0.75;
  c.ns = {50, 100, 200, 400};
  c.jobs = default_jobs();
  const auto res = cli::run_experiment(cw(), c);
  const auto& r = res.report;
  return {res.passed, fmt("fit %.6f vs J = %.6f, relative error %.4f (limit 0.05)", r["fit"]["rate"].get<double>(),
                          r["reference"]["rate"].get<double>(), r["relative_error"].get<double>())};
}

Outcome set_event() {
  cli::ExperimentConfig c;
  c.name = "ldp-set-event";
  c.x0 = cw_point(0.5);
  c.coordinate = 0;
  c.level = 0.8;
  c.t = 1.0;
  c.ns = {50, 100, 200, 400};
  c.reps = 100000;
  c.jobs = default_jobs();
  const auto res = cli::run_experiment(cw(), c);
  const auto& r = res.report;
  return {res.passed, fmt("importance-sampled fit %.6f vs min J = %.6f, relative error %.4f (limit 0.2)",
                          r["fit"]["rate"].get<double>(), r["reference"]["rate"].get<double>(),
                          r["relative_error"].get<double>())};
}

Outcome lln() {
  std::string detail;
  bool ok = true;
  for (const auto& [name, x0] : {std::pair{std::string("curie-weiss"), cw_point(0.5)},
                                 std::pair{std::string("eg3"), SimplexPoint::barycenter(4)}}) {
    cli::ExperimentConfig c;
    c.name = "lln-convergence";
    c.x0 = x0;
    c.ns = {10000};
    c.reps = 100;
    c.tolerance = 0.03;
    c.jobs = default_jobs();
    const auto res = cli::run_experiment(JumpRateTable(builtin_model(name)), c);
    const auto& row = res.report["rows"][0];
    ok = ok && res.passed;
    detail += fmt("%s %zu/100 within 0.03 (max %.4f); ", name.c_str(), row["within"].get<std::size_t>(),
                  row["max_sup"].get<double>());
  }
  return {ok, detail};
}

Outcome eg3_structure() {
  const ModelSpec spec = builtin_model("eg3");
  const bool kerg = is_k_ergodic(spec).ergodic;
  const auto g2 = check_single_ergodic(spec, Generator::Effective);
  const bool g1 = check_single_ergodic(spec, Generator::Single).ergodic;
  const bool ue = check_ue(spec).ok;
  const bool boundary = g2.counterexample && g2.counterexample->minCoeff() == 0.0;
  std::string cx = "none";
  if (g2.counterexample) {
    cx.clear();
    for (Eigen::Index i = 0; i < g2.counterexample->size(); ++i) cx += fmt(i ? ",%g" : "%g", (*g2.counterexample)[i]);
  }
  return {kerg && !g2.ergodic && boundary && !g1 && ue,
          fmt("k_ergodic=%d effective_ergodic=%d (counterexample %s) single_ergodic=%d ue=%d", kerg, g2.ergodic,
              cx.c_str(), g1, ue)};
}

Outcome bounds() {
  cli::ExperimentConfig c;
  c.name = "bounds-suite";
  c.x0 = cw_point(0.5);
  c.ns = {200};
  c.reps = 100000;
  c.jobs = default_jobs();
  const auto res = cli::run_experiment(cw(), c);
  std::string detail;
  for (const auto& row : res.report["rows"])
    detail += fmt("%s %zu/%zu ok; ", row["check"].get<std::string>().c_str(),
                  row["cases"].get<std::size_t>() - row["failures"].get<std::size_t>(), row["cases"].get<std::size_t>());
  return {res.passed, detail};
}

Outcome constructive_paths() {
  std::size_t checks = 0, bad = 0;
  double worst = 0.0;
  auto note = [&](double residual) {
    ++checks;
    worst = std::max(worst, residual);
    bad += !(residual <= 1e-10);
  };
  for (const auto& name : {"eg3", "curie-weiss"}) {
    const ModelSpec spec = builtin_model(name);
    const int d = spec.d();
    for (int u = 0; u < d; ++u)
      for (int w = 0; w < d; ++w) {
        if (u == w) continue;
        Vec s = Vec::Zero(d);
        for (const auto& term : represent_direction(spec, u, w)) s += term.coefficient * term.direction.cast<double>();
        s[w] -= 1.0;
        s[u] += 1.0;
        note(s.norm());
      }
  }
  const ModelSpec spec = builtin_model("eg3");
  const double a = 1.0 / (std::pow(spec.K() + 1, spec.d() - 1) * spec.d());
  std::size_t guard_failures = 0;
  auto telescope = [&](const CommunicatingPath& p, const Vec& target) {
    Vec x = p.path.front().coords();
    for (std::size_t m = 0; m < p.segments(); ++m)
      x += p.speeds[m] * (p.path.times()[m + 1] - p.path.times()[m]) * p.directions[m].cast<double>();
    note((x - target).norm());
    note((p.path.back().coords() - target).norm());
  };
  for (int i = 0; i < spec.d(); ++i) {
    const auto p = build_boundary_escape(spec, SimplexPoint::vertex(spec.d(), i), a);
    guard_failures += p.path.back().min_coord() < a * (1 - 1e-12);
    for (std::size_t m = 0; m < p.segments(); ++m) {
      const double t0 = p.path.times()[m], t1 = p.path.times()[m + 1];
      for (int s = 0; s <= 16; ++s) {
        const Vec z = p.path.at(t0 + (t1 - t0) * s / 16.0);
        for (int j = 0; j < spec.d(); ++j)
          if (p.directions[m][j] < 0 && z[j] < a * (1 - 1e-12)) ++guard_failures;
      }
    }
    telescope(p, p.path.back().coords());
  }
  Stream rng(7, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_simplex_point(spec.d(), rng, 0.05);
    const auto y = random_simplex_point(spec.d(), rng, 0.05);
    telescope(build_interior_path(spec, x, y, 0.05), y.coords());
    telescope(build_path_single_jump(builtin_model("curie-weiss"), cw_point(x[0]), cw_point(y[0])), cw_point(y[0]).coords());
  }
  return {bad == 0 && guard_failures == 0,
          fmt("%zu residuals, worst %.3g; escape guard violations %zu", checks, worst, guard_failures)};
}

Outcome perturbation_reparametrization() {
  const JumpRateTable t = cw();
  struct Case {
    double from, to, t;
  };
  const std::vector<Case> cases{{0.5, 0.7, 0.75}, {0.5, 0.8, 1.0}, {0.7, 0.4, 0.5}, {0.9, 0.5, 1.0}, {0.5, 0.3, 1.0},
                                {0.4, 0.75, 0.6}, {0.2, 0.5, 0.8}, {0.6, 0.9, 1.0}, {0.3, 0.1, 0.9}, {0.5, 0.65, 0.4}};
  std::size_t bad = 0;
  double worst_ratio = 0.0;
  for (const auto& c : cases) {
    const auto opt = minimize_action(t, cw_point(c.from), cw_point(c.to), c.t);
    const double I = opt.value();
    double prev = kInf;
    for (int k = 3; k <= 10; ++k) {
      const double eps = std::abs(path_action(t, perturb_path(t, opt.best.path, std::ldexp(1.0, -k))).value - I);
      bad += !(eps < prev);
      prev = eps;
    }
    bad += !(prev <= 0.05 * I + 1e-3);
    const auto same = reparametrization_check(t, opt.best.path, 1.0);
    bad += same.base != same.rescaled;
    for (double f : {0.99, 1.01}) {
      const auto r = reparametrization_check(t, opt.best.path, f);
      worst_ratio = std::max(worst_ratio, std::abs(r.difference()) / r.bound);
      bad += !(std::abs(r.difference()) <= r.bound);
    }
  }
  return {bad == 0, fmt("%zu optimizer paths, %zu violations, worst |difference|/bound = %.3g", cases.size(), bad,
                        worst_ratio)};
}

Outcome oracle_equivalences() {
  // Ordered tuples of distinct particles against the product formula.
  std::size_t tuple_cases = 0, tuple_bad = 0;
  for (int n = 1; n <= 8; ++n) {
    const int d = 3;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        const LatticePoint x({a, b, n - a - b}, n);
        std::vector<int> state;
        for (int s = 0; s < d; ++s) state.insert(state.end(), static_cast<std::size_t>(x[s]), s);
        for (int k = 1; k <= 3; ++k) {
          int tuples = 1;
          for (int i = 0; i < k; ++i) tuples *= d;
          for (int code = 0; code < tuples; ++code) {
            std::vector<int> tuple;
            for (int i = 0, c = code; i < k; ++i, c /= d) tuple.push_back(c % d);
            std::uint64_t brute = 0;
            std::vector<int> idx(static_cast<std::size_t>(k), 0);
            int total = 1;
            for (int i = 0; i < k; ++i) total *= n;
            for (int e = 0; e < total; ++e) {
              for (int i = 0, c = e; i < k; ++i, c /= n) idx[static_cast<std::size_t>(i)] = c % n;
              bool ok = true;
              for (int i = 0; i < k && ok; ++i) {
                ok = state[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] == tuple[static_cast<std::size_t>(i)];
                for (int j = 0; j < i && ok; ++j) ok = idx[static_cast<std::size_t>(i)] != idx[static_cast<std::size_t>(j)];
              }
              brute += ok;
            }
            ++tuple_cases;
            tuple_bad += brute != tuple_count(n, tuple, x);
          }
        }
      }
  }

  // Gillespie final-state frequencies against uniformization.
  const JumpRateTable t = cw();
  const int n = 50;
  const LatticePoint x0 = LatticePoint::nearest(cw_point(0.5), n);
  const auto exact = exact_transient(t, x0, 1.0);
  const std::size_t reps = 1000000;
  std::vector<int> final_u(reps);
  parallel_for(reps, default_jobs(), [&](std::size_t r) {
    Stream rng(17, r);
    final_u[r] = gillespie_run(t, x0, 1.0, rng).final_state()[1];
  });
  double worst_z = 0.0;
  for (int u : {10, 20, 25, 30, 40}) {
    const double p = exact.probability(LatticePoint({n - u, u}, n));
    const double f = static_cast<double>(std::count(final_u.begin(), final_u.end(), u)) / reps;
    worst_z = std::max(worst_z, std::abs(f - p) / std::sqrt(p * (1.0 - p) / reps));
  }

  // Importance sampling against plain sampling on a moderately rare event.
  const auto opt = minimize_action(t, cw_point(0.5), cw_point(0.25), 1.0);
  const auto event = [&](const TrajectorySample& s) { return s.counts_at(s.states() - 1)[0] >= 0.75 * n; };
  McConfig plain{{n}, 40000, 5, default_jobs(), std::nullopt};
  McConfig tilted{{n}, 10000, 99, default_jobs(), build_tilt_control(t, opt.best)};
  const auto a = mc_rate_estimate(t, cw_point(0.5), 1.0, event, plain).rows.front();
  const auto b = mc_rate_estimate(t, cw_point(0.5), 1.0, event, tilted).rows.front();
  const double is_z = std::abs(a.p_hat - b.p_hat) / std::hypot(a.std_error, b.std_error);

  return {tuple_bad == 0 && worst_z <= 4.0 && is_z <= 3.0,
          fmt("tuple counts %zu/%zu match; Gillespie vs exact worst %.2f sigma (limit 4); IS %.4g vs MC %.4g at %.2f "
              "sigma (limit 3)",
              tuple_cases - tuple_bad, tuple_cases, worst_z, b.p_hat, a.p_hat, is_z)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "dual/primal rate-function equality", 30.0, dual_primal},
      {2, "point-event decay matches minimum action", 300.0, point_event},
      {3, "set-event decay matches minimum action", 600.0, set_event},
      {4, "law of large numbers", 120.0, lln},
      {5, "structure checks on eg3", 5.0, eg3_structure},
      {6, "bounds suite", 180.0, bounds},
      {7, "constructive paths", 60.0, constructive_paths},
      {8, "perturbation and reparametrization", 120.0, perturbation_reparametrization},
      {9, "oracle equivalences", 300.0, oracle_equivalences},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = o.ok && secs <= c.budget_s;
    failed += !ok;
    std::printf("[%s] %d %s: %s (%.1f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
