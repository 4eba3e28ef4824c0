#include "experiments.hpp"

#include "mfldp/bounds.hpp"
#include "mfldp/estimate.hpp"
#include "mfldp/grid.hpp"
#include "mfldp/lln.hpp"
#include "mfldp/optimize.hpp"
#include "mfldp/parallel.hpp"
#include "mfldp/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace mfldp::cli {

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

namespace {

struct Resolved {
  SimplexPoint x0;
  std::vector<int> ns;
  std::size_t reps;
  double t;
};

Resolved resolve(const JumpRateTable& table, const ExperimentConfig& c, std::vector<int> ns, std::size_t reps,
                 double t) {
  Resolved r{c.x0.value_or(SimplexPoint::barycenter(table.d())), c.ns.empty() ? std::move(ns) : c.ns,
             c.reps.value_or(reps), c.t.value_or(t)};
  if (r.x0.dim() != table.d()) throw UsageError("--x0", "dimension does not match the model");
  if (c.reps && *c.reps == 0) throw UsageError("--reps", "must be positive");
  if (!(r.t > 0.0) || !std::isfinite(r.t)) throw UsageError("--t", "must be positive");
  for (int n : r.ns)
    if (n < 1) throw UsageError("--ns", "populations must be positive");
  if (c.target && c.target->dim() != table.d()) throw UsageError("--target", "dimension does not match the model");
  return r;
}

Json resolved_json(const ExperimentConfig& c, const Resolved& r) {
  Json j = config_json(c);
  j["x0"] = to_json(r.x0.coords());
  j["ns"] = r.ns;
  j["reps"] = r.reps;
  j["t"] = r.t;
  return j;
}

Json row_json(const EstimateRow& r) {
  return {{"n", r.n},           {"p_hat", r.p_hat}, {"stderr", r.std_error}, {"decay", r.decay},
          {"reps", r.reps},     {"hits", r.hits},   {"method", r.method},    {"censored", r.censored}};
}

Json fit_json(const std::optional<DecayFit>& f) {
  if (!f) return nullptr;
  return {{"rate", f->rate},
          {"inv_n", f->inv_n},
          {"log_n_over_n", f->log_n_over_n},
          {"residual", f->residual},
          {"points", f->points}};
}

CsvTable estimate_table(const RareEventEstimate& est) {
  CsvTable t{{"n", "p_hat", "stderr", "decay", "reps", "hits", "censored"}, {}};
  for (const auto& r : est.rows)
    t.rows.push_back({static_cast<double>(r.n), r.p_hat, r.std_error, r.decay, static_cast<double>(r.reps),
                      static_cast<double>(r.hits), r.censored ? 1.0 : 0.0});
  return t;
}

MinimizeReport minimize_any(const JumpRateTable& table, const SimplexPoint& a, const SimplexPoint& b, double t,
                            int jobs) {
  MinimizeOptions opts;
  opts.jobs = jobs;
  return t <= 1.0 ? minimize_action(table, a, b, t, opts) : minimize_action_horizon(table, a, b, t, opts);
}

// Fit against a reference rate; relative error when the reference is positive.
void compare(Json& report, bool& passed, const RareEventEstimate& est, double reference, double tolerance) {
  report["tolerance"] = tolerance;
  if (!est.fit) {
    report["relative_error"] = nullptr;
    passed = false;
    return;
  }
  const double err = reference > 0.0 ? std::abs(est.fit->rate - reference) / reference : std::abs(est.fit->rate);
  report["relative_error"] = err;
  passed = err <= tolerance;
}

// Coordinate `i` set to c and the others of `base` rescaled to mass 1 - c.
SimplexPoint on_face(const Vec& base, int i, double c) {
  Vec rest = base;
  rest[i] = 0.0;
  const double s = rest.sum();
  if (s > 0.0)
    rest *= (1.0 - c) / s;
  else
    rest.setConstant((1.0 - c) / static_cast<double>(base.size() - 1));
  rest[i] = c;
  return SimplexPoint(rest);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"lln-convergence", "ldp-set-event", "ldp-point-event",
                                              "quasipotential-stationary", "bounds-suite"};
  return names;
}

Json config_json(const ExperimentConfig& c) {
  Json j{{"experiment", c.name}, {"seed", c.seed}};
  if (c.x0) j["x0"] = to_json(c.x0->coords());
  if (c.target) j["target"] = to_json(c.target->coords());
  if (!c.ns.empty()) j["ns"] = c.ns;
  if (c.reps) j["reps"] = *c.reps;
  if (c.t) j["t"] = *c.t;
  return j;
}

ExperimentResult run_experiment(const JumpRateTable& table, const ExperimentConfig& config) {
  if (config.name == "lln-convergence") return lln_convergence(table, config);
  if (config.name == "ldp-set-event") return ldp_set_event(table, config);
  if (config.name == "ldp-point-event") return ldp_point_event(table, config);
  if (config.name == "quasipotential-stationary") return quasipotential_stationary(table, config);
  if (config.name == "bounds-suite") return bounds_suite(table, config);
  throw UsageError("--experiment", "unknown experiment '" + config.name + "'");
}

ExperimentResult lln_convergence(const JumpRateTable& table, const ExperimentConfig& config) {
  const Resolved r = resolve(table, config, {1000, 10000}, 100, 1.0);
  Json conf = resolved_json(config, r);
  conf["tolerance"] = config.tolerance;
  const PiecewiseLinearPath mean_field = integrate_lln(table, r.x0, r.t).as_path();

  ExperimentResult out;
  out.table.header = {"n", "reps", "within", "fraction", "mean_sup", "max_sup"};
  Json rows = Json::array();
  for (int n : r.ns) {
    const LatticePoint start = LatticePoint::nearest(r.x0, n);
    std::vector<double> sup(r.reps);
    parallel_for(r.reps, config.jobs, [&](std::size_t k) {
      Stream rng(config.seed, replicate_stream(n, k));
      sup[k] = sup_deviation(gillespie_run(table, start, r.t, rng), mean_field);
    });
    const auto within = static_cast<std::size_t>(
        std::count_if(sup.begin(), sup.end(), [&](double s) { return s <= config.tolerance; }));
    double mean = 0.0;
    for (double s : sup) mean += s;
    mean /= static_cast<double>(sup.size());
    const double worst = *std::max_element(sup.begin(), sup.end());
    const double fraction = static_cast<double>(within) / static_cast<double>(r.reps);
    rows.push_back({{"n", n},
                    {"reps", r.reps},
                    {"within", within},
                    {"fraction", fraction},
                    {"mean_sup", mean},
                    {"max_sup", worst},
                    {"passed", fraction >= 0.95}});
    out.table.rows.push_back({static_cast<double>(n), static_cast<double>(r.reps), static_cast<double>(within),
                              fraction, mean, worst});
  }
  // Concentration is only expected at the largest population.
  out.passed = rows.back()["passed"].get<bool>();
  out.report = {{"config", conf}, {"rows", rows}, {"passed", out.passed}};
  return out;
}

ExperimentResult ldp_set_event(const JumpRateTable& table, const ExperimentConfig& config) {
  const Resolved r = resolve(table, config, {50, 100, 200, 400}, 10000, 1.0);
  const int i = config.coordinate;
  if (i < 0 || i >= table.d()) throw UsageError("--coordinate", "outside 1..d");
  if (!(config.level > 0.0 && config.level <= 1.0)) throw UsageError("--level", "must lie in (0, 1]");
  if (config.method != "is" && config.method != "mc") throw UsageError("--method", "must be 'is' or 'mc'");
  Json conf = resolved_json(config, r);
  conf["coordinate"] = i + 1;
  conf["level"] = config.level;
  conf["method"] = config.method;

  const Vec end = integrate_lln(table, r.x0, r.t).states.back().coords();
  Json reference{{"lln_endpoint", to_json(end)}};
  double ref_rate = 0.0;
  std::optional<MinimizeReport> best;
  if (end[i] < config.level) {
    // Candidate targets on and just inside the event face.
    std::vector<SimplexPoint> targets;
    for (double c : {config.level, config.level + 0.05, config.level + 0.1}) {
      if (c > 1.0) break;
      const SimplexPoint base = on_face(end, i, c);
      targets.push_back(base);
      if (c >= 1.0) break;
      for (int j = 0; j < table.d(); ++j) {
        if (j == i) continue;
        const Vec w = 0.5 * (base.coords() + on_face(Vec::Unit(table.d(), j), i, c).coords());
        targets.push_back(SimplexPoint(w));
      }
    }
    Json cands = Json::array();
    for (const auto& target : targets) {
      MinimizeReport rep = minimize_any(table, r.x0, target, r.t, config.jobs);
      cands.push_back({{"target", to_json(target.coords())}, {"value", rep.value()}});
      if (!best || rep.value() < best->value()) best = std::move(rep);
    }
    ref_rate = best->value();
    reference["candidates"] = cands;
    reference["target"] = to_json(best->best.path.back().coords());
  }
  reference["rate"] = ref_rate;

  McConfig mc{r.ns, r.reps, config.seed, config.jobs, std::nullopt};
  if (config.method == "is" && best && best->best.finite()) mc.control = build_tilt_control(table, best->best);
  const double level = config.level;
  const auto event = [i, level](const TrajectorySample& s) {
    return s.counts_at(s.states() - 1)[static_cast<std::size_t>(i)] >= level * s.n - 1e-9;
  };
  const RareEventEstimate est = mc_rate_estimate(table, r.x0, r.t, event, mc);

  ExperimentResult out;
  Json rows = Json::array();
  for (const auto& row : est.rows) rows.push_back(row_json(row));
  out.report = {{"config", conf}, {"rows", rows}, {"fit", fit_json(est.fit)}, {"reference", reference}};
  compare(out.report, out.passed, est, ref_rate, 0.2);
  out.report["passed"] = out.passed;
  out.table = estimate_table(est);
  return out;
}

ExperimentResult ldp_point_event(const JumpRateTable& table, const ExperimentConfig& config) {
  const Resolved r = resolve(table, config, {50, 100, 200, 400}, 10000, 1.0);
  if (!config.target) throw UsageError("--target", "required by ldp-point-event");
  Json conf = resolved_json(config, r);

  const MinimizeReport opt = minimize_any(table, r.x0, *config.target, r.t, config.jobs);
  McConfig mc{r.ns, r.reps, config.seed, config.jobs, std::nullopt};
  const RareEventEstimate est = point_event_estimate(table, r.x0, *config.target, r.t, mc);

  ExperimentResult out;
  Json rows = Json::array();
  for (const auto& row : est.rows) rows.push_back(row_json(row));
  out.report = {{"config", conf},
                {"rows", rows},
                {"fit", fit_json(est.fit)},
                {"reference", {{"rate", opt.value()}, {"start", opt.start}, {"converged", opt.converged}}}};
  compare(out.report, out.passed, est, opt.value(), 0.05);
  out.report["passed"] = out.passed;
  out.table = estimate_table(est);
  return out;
}

ExperimentResult quasipotential_stationary(const JumpRateTable& table, const ExperimentConfig& config) {
  const Resolved r = resolve(table, config, {20, 40, 80, 160}, 50, 500.0);
  Json conf = resolved_json(config, r);
  const double burn_in = 0.1 * r.t;
  conf["burn_in"] = burn_in;

  const SimplexPoint fixed = integrate_lln(table, r.x0, 50.0).states.back();
  if (table.drift(fixed.coords()).norm() > 1e-6)
    throw DomainError("mean-field flow from x0 does not settle at a fixed point by t = 50");
  std::vector<SimplexPoint> targets;
  if (config.target)
    targets.push_back(*config.target);
  else
    for (int i = 0; i < table.d(); ++i) targets.push_back(SimplexPoint::mix(fixed, SimplexPoint::vertex(table.d(), i), 0.5));

  QuasipotentialSolver solver(table);
  std::vector<double> V;
  for (const auto& y : targets) V.push_back(solver.solve(fixed, y).value);

  // Occupation time of each target's nearest lattice point after the burn-in.
  const std::size_t m = targets.size();
  std::vector<std::vector<double>> freq(r.ns.size(), std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < r.ns.size(); ++a) {
    const int n = r.ns[a];
    const LatticePoint start = LatticePoint::nearest(fixed, n);
    std::vector<LatticePoint> goals;
    for (const auto& y : targets) goals.push_back(LatticePoint::nearest(y, n));
    std::vector<std::vector<double>> occ(r.reps, std::vector<double>(m, 0.0));
    parallel_for(r.reps, config.jobs, [&](std::size_t k) {
      Stream rng(config.seed, replicate_stream(n, k));
      const TrajectorySample s = gillespie_run(table, start, r.t, rng);
      for (std::size_t q = 0; q < s.states(); ++q) {
        const double lo = std::max(burn_in, s.times[q]);
        const double hi = q + 1 < s.states() ? s.times[q + 1] : r.t;
        if (hi <= lo) continue;
        const auto c = s.counts_at(q);
        for (std::size_t g = 0; g < m; ++g)
          if (std::equal(c.begin(), c.end(), goals[g].counts().begin())) occ[k][g] += hi - lo;
      }
    });
    for (const auto& o : occ)
      for (std::size_t g = 0; g < m; ++g) freq[a][g] += o[g];
    for (double& f : freq[a]) f /= static_cast<double>(r.reps) * (r.t - burn_in);
  }

  ExperimentResult out;
  out.table.header = {"target", "n", "frequency", "decay", "V"};
  Json items = Json::array();
  for (std::size_t g = 0; g < m; ++g) {
    Json rows = Json::array();
    std::vector<int> fit_n;
    std::vector<double> fit_decay;
    for (std::size_t a = 0; a < r.ns.size(); ++a) {
      const int n = r.ns[a];
      const double f = freq[a][g];
      const double decay = f > 0.0 ? -std::log(f) / n : kInf;
      rows.push_back({{"n", n}, {"frequency", f}, {"decay", decay}, {"censored", f <= 0.0}});
      out.table.rows.push_back({static_cast<double>(g + 1), static_cast<double>(n), f, decay, V[g]});
      if (f > 0.0) {
        fit_n.push_back(n);
        fit_decay.push_back(decay);
      }
    }
    std::optional<DecayFit> fit;
    if (std::set<int>(fit_n.begin(), fit_n.end()).size() >= 3) fit = extrapolate_decay(fit_n, fit_decay);
    Json item{{"target", to_json(targets[g].coords())}, {"V", V[g]}, {"rows", rows}, {"fit", fit_json(fit)}};
    item["relative_error"] = fit && V[g] > 0.0 ? Json(std::abs(fit->rate - V[g]) / V[g]) : Json(nullptr);
    items.push_back(item);
  }
  out.report = {{"config", conf}, {"fixed_point", to_json(fixed.coords())}, {"targets", items}};
  return out;
}

ExperimentResult bounds_suite(const JumpRateTable& table, const ExperimentConfig& config) {
  const Resolved r = resolve(table, config, {200}, 100000, 1.0);
  Json conf = resolved_json(config, r);
  conf["delta"] = config.delta;
  const int d = table.d();

  ExperimentResult out;
  out.table.header = {"check_index", "cases", "failures", "worst_margin"};
  Json rows = Json::array();
  auto add = [&](const std::string& name, std::size_t cases, std::size_t failures, double worst) {
    rows.push_back({{"check", name}, {"cases", cases}, {"failures", failures}, {"worst_margin", worst},
                    {"passed", failures == 0}});
    out.table.rows.push_back({static_cast<double>(rows.size()), static_cast<double>(cases),
                              static_cast<double>(failures), worst});
    out.passed = out.passed && failures == 0;
  };

  {
    // Exact end-of-chain probability against the birth-chain bound on random chains.
    Stream rng(config.seed, 61);
    std::size_t failures = 0;
    double worst = kInf;
    for (int trial = 0; trial < 20; ++trial) {
      const int N = 1 + static_cast<int>(rng() % 5);
      std::vector<double> b(static_cast<std::size_t>(N));
      for (double& x : b) x = 0.2 + 2.0 * rng.uniform();
      const double c = *std::max_element(b.begin(), b.end()) + 2.0 * rng.uniform();
      const double time = 0.1 + 2.0 * rng.uniform();
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
      const double margin = uniformize(Q.sparseView(), p0, time).p[N] - birth_chain_bound(b, c, time);
      failures += margin < -1e-12;
      worst = std::min(worst, margin);
    }
    add("birth-chain", 20, failures, worst);
  }

  {
    // Empirical excursion frequency against the excursion bound.
    const int n = r.ns.front();
    const LatticePoint start = LatticePoint::nearest(r.x0, n);
    const double limit = excursion_time_limit(table, config.delta);
    std::size_t failures = 0;
    double worst = kInf;
    Json detail = Json::array();
    for (double tau : {limit, 0.1 * limit}) {
      std::vector<char> hit(r.reps, 0);
      parallel_for(r.reps, config.jobs, [&](std::size_t k) {
        Stream rng(config.seed, replicate_stream(n, k));
        const TrajectorySample s = gillespie_run(table, start, tau, rng);
        for (std::size_t q = 0; q < s.states() && !hit[k]; ++q)
          hit[k] = (s.coords_at(s.times[q]) - start.coords()).norm() >= config.delta;
      });
      const double freq = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(r.reps);
      const double bound = excursion_bound(table, n, config.delta, tau);
      failures += freq > bound;
      worst = std::min(worst, bound - freq);
      detail.push_back({{"tau", tau}, {"frequency", freq}, {"bound", bound}});
    }
    add("excursion", 2, failures, worst);
    rows.back()["detail"] = detail;
    rows.back()["n"] = n;
  }

  {
    // Superlinear growth of the local rate along rays.
    Stream rng(config.seed, 45);
    std::normal_distribution<double> normal;
    std::size_t failures = 0, cases = 0;
    double worst = kInf;
    for (int p = 0; p < 10; ++p) {
      const SimplexPoint x = random_simplex_point(d, rng, 0.05);
      for (int k = 0; k < 10; ++k) {
        Vec u(d);
        for (int i = 0; i < d; ++i) u[i] = normal(rng);
        u.array() -= u.mean();
        u /= u.norm();
        for (double scale : {10.0, 100.0, 1000.0}) {
          const SuperlinearityCheck c = superlinearity_bound_check(table, x, scale * u);
          ++cases;
          failures += !c.holds;
          worst = std::min(worst, c.value - c.bound);
        }
      }
    }
    add("superlinearity", cases, failures, worst);
  }

  {
    // r l(q/r) + r(e - 1) >= q at every converged primal solve.
    Stream rng(config.seed, 44);
    std::normal_distribution<double> normal;
    std::size_t failures = 0, cases = 0;
    double worst = kInf;
    for (int p = 0; p < 200; ++p) {
      const SimplexPoint x = random_simplex_point(d, rng, 0.05);
      Vec beta(d);
      for (int i = 0; i < d; ++i) beta[i] = normal(rng);
      beta.array() -= beta.mean();
      beta *= std::pow(10.0, p % 3 - 1);
      const LocalRateResult res = local_rate_primal(table, x, beta);
      if (!res.finite()) continue;
      const Vec lam = table.limit_rates(x.coords());
      for (std::size_t v = 0; v < table.size(); ++v) {
        const double rate = lam[static_cast<Eigen::Index>(v)];
        if (rate <= 0.0) continue;
        const double q = res.q[static_cast<Eigen::Index>(v)];
        const double margin = rate * poisson_ell(q / rate) + rate * (std::exp(1.0) - 1.0) - q;
        ++cases;
        failures += margin < -1e-12 * (1.0 + q);
        worst = std::min(worst, margin);
      }
    }
    add("flow-entropy", cases, failures, worst);
  }

  out.report = {{"config", conf}, {"rows", rows}, {"passed", out.passed}};
  return out;
}

}  // namespace mfldp::cli
