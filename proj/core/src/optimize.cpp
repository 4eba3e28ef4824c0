#include "mfldp/optimize.hpp"

#include "mfldp/lln.hpp"
#include "mfldp/parallel.hpp"
#include "mfldp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfldp {

namespace {

// Knot vectors on a fixed grid with cached segment actions and dual warm starts.
struct KnotState {
  const JumpRateTable* table;
  std::vector<double> times;
  std::vector<Vec> x;
  std::vector<double> seg;
  std::vector<Vec> warm;

  double dt(std::size_t m) const { return times[m + 1] - times[m]; }

  double segment(std::size_t m, const Vec& a, const Vec& b) const {
    Vec w = warm[m];
    return segment_action(*table, a, b, dt(m), &w);
  }

  double total() const {
    double s = 0.0;
    for (double v : seg) s += v;
    return s;
  }

  void evaluate_all() {
    seg.resize(x.size() - 1);
    warm.resize(x.size() - 1, Vec::Zero(table->d()));
    for (std::size_t m = 0; m + 1 < x.size(); ++m) {
      Vec w = m > 0 && std::isfinite(seg[m - 1]) ? warm[m - 1] : Vec::Zero(table->d());
      Vec start = w;
      seg[m] = segment_action(*table, x[m], x[m + 1], dt(m), &w);
      warm[m] = std::isfinite(seg[m]) ? start : Vec::Zero(table->d());
    }
  }

  // Change of the two segments adjacent to knot j when it moves to y.
  double local_change(std::size_t j, const Vec& y) const {
    const double before = seg[j - 1] + seg[j];
    return segment(j - 1, x[j - 1], y) + segment(j, y, x[j + 1]) - before;
  }
};

Vec sum_zero(Vec g) {
  g.array() -= g.mean();
  return g;
}

std::vector<Vec> gradient(const KnotState& s, double h, int jobs) {
  const int d = s.table->d();
  const std::size_t n = s.x.size();
  std::vector<Vec> g(n, Vec::Zero(d));
  parallel_for(n >= 2 ? n - 2 : 0, jobs, [&](std::size_t jj) {
    const std::size_t j = jj + 1;
    for (int i = 0; i < d; ++i) {
      Vec u = Vec::Constant(d, -1.0 / d);
      u[i] += 1.0;
      const Vec xp = s.x[j] + h * u;
      const Vec xm = s.x[j] - h * u;
      const bool fp = xp.minCoeff() >= 0.0;
      const bool fm = xm.minCoeff() >= 0.0;
      const double dp = fp ? s.local_change(j, xp) : kInf;
      const double dm = fm ? s.local_change(j, xm) : kInf;
      if (std::isfinite(dp) && std::isfinite(dm))
        g[j][i] = (dp - dm) / (2.0 * h);
      else if (std::isfinite(dp))
        g[j][i] = dp / h;
      else if (std::isfinite(dm))
        g[j][i] = -dm / h;
    }
    g[j] = sum_zero(g[j]);
  });
  return g;
}

// Solves the interior-knot system of the discrete Laplacian sum_m |dx_m|^2 / dt_m,
// coordinatewise. Steps along the result are mesh independent, and the sum-zero
// property of each knot is preserved.
std::vector<Vec> precondition(const KnotState& s, const std::vector<Vec>& g) {
  const std::size_t n = s.x.size();
  std::vector<Vec> out(n, Vec::Zero(g.front().size()));
  if (n <= 2) return out;
  const std::size_t m = n - 2;
  std::vector<double> diag(m), off(m), scratch(m);
  for (std::size_t j = 0; j < m; ++j) {
    diag[j] = 1.0 / s.dt(j) + 1.0 / s.dt(j + 1);
    off[j] = -1.0 / s.dt(j + 1);
  }
  const auto d = g.front().size();
  for (Eigen::Index i = 0; i < d; ++i) {
    // Thomas algorithm.
    std::vector<double> c(m), r(m);
    c[0] = off[0] / diag[0];
    r[0] = g[1][i] / diag[0];
    for (std::size_t j = 1; j < m; ++j) {
      const double den = diag[j] - off[j - 1] * c[j - 1];
      c[j] = off[j] / den;
      r[j] = (g[j + 1][i] - off[j - 1] * r[j - 1]) / den;
    }
    for (std::size_t j = m; j-- > 0;) {
      if (j + 1 < m) r[j] -= c[j] * r[j + 1];
      out[j + 1][i] = r[j];
    }
  }
  return out;
}

double dot(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j].dot(b[j]);
  return s;
}

StartOutcome descend(KnotState& s, const MinimizeOptions& opts) {
  StartOutcome out;
  s.evaluate_all();
  double f = s.total();
  out.initial = f;
  if (!std::isfinite(f) || s.x.size() <= 2) {
    out.value = f;
    out.converged = std::isfinite(f);
    return out;
  }
  std::vector<Vec> g = gradient(s, opts.fd_step, opts.jobs);
  std::vector<Vec> prev_x, prev_g;
  double alpha = 0.0;
  int quiet = 0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const std::vector<Vec> p = precondition(s, g);
    double pmax = 0.0;
    for (const auto& pj : p) pmax = std::max(pmax, pj.cwiseAbs().maxCoeff());
    if (pmax == 0.0) {
      out.converged = true;
      break;
    }
    alpha = 0.0;
    if (!prev_x.empty()) {
      // Barzilai-Borwein step in the preconditioned metric.
      std::vector<Vec> dx(s.x.size()), dg(s.x.size());
      for (std::size_t j = 0; j < s.x.size(); ++j) {
        dx[j] = s.x[j] - prev_x[j];
        dg[j] = g[j] - prev_g[j];
      }
      const double sy = dot(dx, dg);
      if (sy > 0.0) alpha = sy / dot(dg, precondition(s, dg));
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) alpha = 0.01 / pmax;
    alpha = std::min(alpha, 0.5 / pmax);

    KnotState trial = s;
    double fn = kInf;
    double decrease = 0.0;
    for (int h = 0; h < 40; ++h) {
      decrease = 0.0;
      for (std::size_t j = 1; j + 1 < s.x.size(); ++j) {
        trial.x[j] = project_to_simplex(s.x[j] - alpha * p[j]);
        decrease += g[j].dot(s.x[j] - trial.x[j]);
      }
      trial.evaluate_all();
      fn = trial.total();
      if (std::isfinite(fn) && fn <= f - 1e-4 * decrease) break;
      alpha *= 0.5;
    }
    if (!(std::isfinite(fn) && fn <= f)) {
      out.converged = true;
      break;
    }
    prev_x = s.x;
    prev_g = g;
    const double gain = f - fn;
    s = std::move(trial);
    f = fn;
    g = gradient(s, opts.fd_step, opts.jobs);
    quiet = gain <= opts.tolerance * (1.0 + f) ? quiet + 1 : 0;
    if (quiet >= 3) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.value = f;
  return out;
}

KnotState knot_state(const JumpRateTable& table, const PiecewiseLinearPath& path) {
  KnotState s{&table, path.times(), {}, {}, {}};
  for (const auto& k : path.knots()) s.x.push_back(k.coords());
  return s;
}

PiecewiseLinearPath to_path(const KnotState& s) {
  std::vector<SimplexPoint> knots;
  for (const auto& v : s.x) knots.emplace_back(v / v.sum());
  return {s.times, std::move(knots)};
}

// Mean-field path over the first half followed by a constructive interior
// bridge to xT over the second half.
std::optional<PiecewiseLinearPath> lln_bridge(const JumpRateTable& table, const SimplexPoint& x0,
                                              const SimplexPoint& xT, double t) {
  const double half = 0.5 * t;
  const auto lln = integrate_lln(table, x0, half, std::min(1e-3, half / 20.0));
  const SimplexPoint& mid = lln.states.back();
  const double a = 0.5 * std::min(mid.min_coord(), xT.min_coord());
  if (!(a > 1e-9)) return std::nullopt;
  try {
    const CommunicatingPath bridge = build_interior_path(table.model(), mid, xT, a);
    std::vector<double> times = lln.times;
    std::vector<SimplexPoint> knots = lln.states;
    const auto& bt = bridge.path.times();
    const double span = bridge.path.duration();
    for (std::size_t m = 1; m < bt.size(); ++m) {
      times.push_back(half + half * (bt[m] - bt.front()) / span);
      knots.push_back(bridge.path.knots()[m]);
    }
    times.back() = t;
    knots.back() = xT;
    return PiecewiseLinearPath(std::move(times), std::move(knots));
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

MinimizeReport minimize_impl(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& xT, double t,
                             const MinimizeOptions& opts) {
  if (x0.dim() != table.d() || xT.dim() != table.d()) throw DomainError("minimize_action: dimension mismatch");
  if (opts.knots < 2) throw DomainError("minimize_action: at least two knots are needed");
  const int segments = opts.knots - 1;
  const std::vector<double> grid = uniform_grid(t, segments);
  const PiecewiseLinearPath line = PiecewiseLinearPath::straight(x0, xT, t, segments);

  std::vector<std::pair<std::string, PiecewiseLinearPath>> starts;
  starts.emplace_back("straight", line);
  if (auto b = lln_bridge(table, x0, xT, t)) starts.emplace_back("lln-bridge", b->resample(grid));
  for (double rho : opts.rhos) {
    PiecewiseLinearPath p = perturb_path(table, line, rho);
    std::vector<SimplexPoint> knots = p.knots();
    knots.back() = xT;
    std::ostringstream label;
    label << "perturbed rho=" << rho;
    starts.emplace_back(label.str(), PiecewiseLinearPath(grid, std::move(knots)));
  }

  MinimizeReport rep{path_action(table, line), {}, {}, 0, false};
  rep.best.value = kInf;
  for (auto& [label, path] : starts) {
    StartOutcome o = refine_path(table, path, opts);
    o.label = label;
    rep.starts.push_back(o);
    if (o.value < rep.best.value || !std::isfinite(rep.best.value)) {
      if (!std::isfinite(o.value) && std::isfinite(rep.best.value)) continue;
      rep.best = path_action(table, path);
      rep.start = label;
      rep.iterations = o.iterations;
      rep.converged = o.converged;
    }
  }
  return rep;
}

}  // namespace

StartOutcome refine_path(const JumpRateTable& table, PiecewiseLinearPath& path, const MinimizeOptions& opts) {
  KnotState s = knot_state(table, path);
  StartOutcome o = descend(s, opts);
  PiecewiseLinearPath out = to_path(s);
  std::vector<SimplexPoint> knots = out.knots();
  knots.front() = path.front();
  knots.back() = path.back();
  path = PiecewiseLinearPath(path.times(), std::move(knots));
  return o;
}

MinimizeReport minimize_action(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& xT, double t,
                               const MinimizeOptions& opts) {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("minimize_action: t must lie in (0, 1]");
  return minimize_impl(table, x0, xT, t, opts);
}

MinimizeReport minimize_action_horizon(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& xT,
                                       double t, const MinimizeOptions& opts) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("minimize_action: horizon must be positive");
  return minimize_impl(table, x0, xT, t, opts);
}

QuasipotentialSolver::QuasipotentialSolver(const JumpRateTable& table, QuasipotentialOptions opts)
    : table_(table), opts_(std::move(opts)) {}

namespace {

PiecewiseLinearPath concatenate(const PiecewiseLinearPath& a, const PiecewiseLinearPath& b) {
  std::vector<double> times = a.times();
  std::vector<SimplexPoint> knots = a.knots();
  const double shift = a.t1() - b.t0();
  for (std::size_t m = 1; m < b.size(); ++m) {
    times.push_back(b.times()[m] + shift);
    knots.push_back(b.knots()[m]);
  }
  return {std::move(times), std::move(knots)};
}

}  // namespace

QuasipotentialResult QuasipotentialSolver::solve(const SimplexPoint& x, const SimplexPoint& y) {
  for (const auto& e : cache_)
    if (e.from == x && e.to == y) return e.result;

  QuasipotentialResult best;
  if (x == y) {
    best.value = 0.0;
    best.path = PiecewiseLinearPath({0.0}, {x});
    best.source = "constant";
  } else {
    for (double T : opts_.horizons) {
      MinimizeReport r = minimize_action_horizon(table_, x, y, T, opts_.minimize);
      if (r.best.value < best.value) {
        best.value = r.best.value;
        best.path = r.best.path;
        best.horizon = T;
        std::ostringstream label;
        label << "horizon=" << T;
        best.source = label.str();
      }
    }
    // Concatenations through cached waypoints.
    for (std::size_t w = 0; w < cache_.size(); ++w) {
      const Entry& first = cache_[w];
      if (!(first.from == x) || first.to == y) continue;
      for (const auto& second : cache_) {
        if (!(second.from == first.to) || !(second.to == y)) continue;
        if (!std::isfinite(first.result.value) || !std::isfinite(second.result.value)) continue;
        if (first.result.path->size() < 2 || second.result.path->size() < 2) continue;
        PiecewiseLinearPath joined = concatenate(*first.result.path, *second.result.path);
        refine_path(table_, joined, opts_.minimize);
        const double v = path_action(table_, joined).value;
        if (v < best.value) {
          best.value = v;
          best.horizon = joined.duration();
          best.path = std::move(joined);
          best.source = "via=" + std::to_string(w);
        }
      }
    }
  }
  cache_.push_back({x, y, best});
  return best;
}

QuasipotentialResult quasipotential(const JumpRateTable& table, const SimplexPoint& x, const SimplexPoint& y,
                                    const QuasipotentialOptions& opts) {
  QuasipotentialSolver solver(table, opts);
  return solver.solve(x, y);
}

}  // namespace mfldp
