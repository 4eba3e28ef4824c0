#include "mfldp/simulate.hpp"

#include "mfldp/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfldp {

LatticePoint TrajectorySample::state(std::size_t m) const {
  const auto c = counts_at(m);
  return {std::vector<int>(c.begin(), c.end()), n};
}

std::size_t TrajectorySample::index_at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
}

Vec TrajectorySample::coords_at(double t) const {
  const auto c = counts_at(index_at(t));
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = static_cast<double>(c[static_cast<std::size_t>(i)]) / n;
  return x;
}

namespace {

TrajectorySample start_sample(const LatticePoint& x0, double T, const Stream& rng) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("simulation horizon must be positive");
  TrajectorySample s;
  s.n = x0.n();
  s.d = x0.dim();
  s.horizon = T;
  s.stream = rng.id();
  s.times.push_back(0.0);
  s.counts = x0.counts();
  return s;
}

void check_rates(std::span<double> lam) {
  for (double& l : lam) {
    if (l < 0.0) {
      if (l < -1e-12) throw DomainError("negative jump rate encountered");
      l = 0.0;
    }
    if (!std::isfinite(l)) throw DomainError("non-finite jump rate encountered");
  }
}

// Index drawn proportionally to the weights; total must be their positive sum.
std::size_t pick(std::span<const double> w, double total, Stream& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (w[v] <= 0.0) continue;
    acc += w[v];
    last = v;
    if (u < acc) return v;
  }
  return last;
}

void apply_jump(TrajectorySample& s, const JumpRateTable& table, std::vector<int>& cur, std::size_t v, double t) {
  const IVec& delta = table.direction(v);
  for (int i = 0; i < s.d; ++i) cur[static_cast<std::size_t>(i)] += delta[i];
  s.times.push_back(t);
  s.counts.insert(s.counts.end(), cur.begin(), cur.end());
  s.directions.push_back(v);
}

bool stays_on_lattice(const JumpRateTable& table, const std::vector<int>& cur, std::size_t v) {
  const IVec& delta = table.direction(v);
  for (Eigen::Index i = 0; i < delta.size(); ++i)
    if (cur[static_cast<std::size_t>(i)] + delta[i] < 0) return false;
  return true;
}

// Shared loop of the controlled simulators. `alpha` fills the intensities at
// (t, state) and returns the time until which they stay fixed absent a jump.
template <class Alpha>
ControlledSample run_controlled(const JumpRateTable& table, const LatticePoint& x0, double T, Alpha&& alpha,
                                Stream& rng) {
  ControlledSample out{start_sample(x0, T, rng), 0.0, 0};
  TrajectorySample& s = out.path;
  const std::size_t V = table.size();
  std::vector<double> xbuf(static_cast<std::size_t>(s.d)), lam(V), a(V);
  std::vector<int> cur = x0.counts();
  const double n = s.n;
  double t = 0.0;
  while (t < T) {
    table.finite_rates(s.n, cur, xbuf, lam);
    check_rates(lam);
    const double hold_until = std::min(T, alpha(t, std::span<const int>(cur), std::span<double>(a)));
    double lam_sum = 0.0, a_sum = 0.0, a_eff = 0.0;
    for (std::size_t v = 0; v < V; ++v) {
      if (!(a[v] >= 0.0) || !std::isfinite(a[v])) throw DomainError("control intensities must be finite and nonnegative");
      lam_sum += lam[v];
      a_sum += a[v];
      if (stays_on_lattice(table, cur, v)) a_eff += a[v];
    }
    const double tau = a_sum > 0.0 ? rng.exponential(n * a_sum) : std::numeric_limits<double>::infinity();
    if (t + tau >= hold_until) {
      out.log_lr -= n * (lam_sum - a_eff) * (hold_until - t);
      t = hold_until;
      continue;
    }
    out.log_lr -= n * (lam_sum - a_eff) * tau;
    t += tau;
    const std::size_t v = pick(a, a_sum, rng);
    if (!stays_on_lattice(table, cur, v)) {
      ++out.suppressed;
      continue;
    }
    out.log_lr += std::log(lam[v] / a[v]);
    apply_jump(s, table, cur, v, t);
  }
  return out;
}

}  // namespace

TrajectorySample gillespie_run(const JumpRateTable& table, const LatticePoint& x0, double T, Stream& rng) {
  if (x0.dim() != table.d()) throw DomainError("gillespie_run: dimension mismatch");
  TrajectorySample s = start_sample(x0, T, rng);
  std::vector<double> xbuf(static_cast<std::size_t>(s.d)), lam(table.size());
  std::vector<int> cur = x0.counts();
  double t = 0.0;
  for (;;) {
    table.finite_rates(s.n, cur, xbuf, lam);
    check_rates(lam);
    double total = 0.0;
    for (double l : lam) total += l;
    if (total <= 0.0) break;
    t += rng.exponential(s.n * total);
    if (t >= T) break;
    apply_jump(s, table, cur, pick(lam, total, rng), t);
  }
  return s;
}

double sup_deviation(const TrajectorySample& s, const PiecewiseLinearPath& reference) {
  double best = 0.0;
  Vec x(s.d);
  for (std::size_t m = 0; m < s.states(); ++m) {
    const auto c = s.counts_at(m);
    for (int i = 0; i < s.d; ++i) x[i] = static_cast<double>(c[static_cast<std::size_t>(i)]) / s.n;
    const double end = m + 1 < s.states() ? s.times[m + 1] : s.horizon;
    best = std::max(best, (x - reference.at(s.times[m])).cwiseAbs().maxCoeff());
    best = std::max(best, (x - reference.at(std::min(end, reference.t1()))).cwiseAbs().maxCoeff());
  }
  return best;
}

std::size_t ControlSignal::piece_at(double t) const {
  if (t < times.front() || t >= times.back()) throw DomainError("control piece undefined at the requested time");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

ControlledSample controlled_run(const JumpRateTable& table, const LatticePoint& x0, double T,
                                const ControlSignal& control, Stream& rng) {
  if (x0.dim() != table.d()) throw DomainError("controlled_run: dimension mismatch");
  if (control.rates.rows() != static_cast<Eigen::Index>(table.size()) ||
      control.rates.cols() != static_cast<Eigen::Index>(control.pieces()))
    throw DomainError("controlled_run: control shape does not match the table");
  if (control.times.back() < T) throw DomainError("controlled_run: control piece undefined on [0, T]");
  return run_controlled(table, x0, T, [&](double t, std::span<const int>, std::span<double> a) {
    const std::size_t p = control.piece_at(t);
    for (std::size_t v = 0; v < a.size(); ++v) a[v] = control.rates(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(p));
    return control.times[p + 1];
  }, rng);
}

ControlledSample controlled_run(const JumpRateTable& table, const LatticePoint& x0, double T,
                                const FeedbackControl& control, Stream& rng) {
  if (x0.dim() != table.d()) throw DomainError("controlled_run: dimension mismatch");
  return run_controlled(table, x0, T, [&](double t, std::span<const int> c, std::span<double> a) {
    control(t, c, a);
    return std::numeric_limits<double>::infinity();
  }, rng);
}

ControlSignal build_tilt_control(const JumpRateTable& table, const ActionReport& optimal) {
  if (!optimal.finite()) throw DomainError("build_tilt_control: path has infinite action");
  const PiecewiseLinearPath& path = optimal.path;
  ControlSignal c;
  c.times.assign(path.times().begin(), path.times().end());
  const double shift = c.times.front();
  for (double& t : c.times) t -= shift;
  c.rates = Mat::Zero(static_cast<Eigen::Index>(table.size()), static_cast<Eigen::Index>(path.segments()));
  for (std::size_t m = 0; m < path.segments(); ++m) {
    const Vec mid = 0.5 * (path.knots()[m].coords() + path.knots()[m + 1].coords());
    const LocalRateResult r = local_rate(table, SimplexPoint(mid), path.velocity(m));
    if (r.status == SolveStatus::Infinite) throw DomainError("build_tilt_control: infinite local rate on the path");
    c.rates.col(static_cast<Eigen::Index>(m)) = r.q.cwiseMax(1e-12);
  }
  c.bound = c.rates.maxCoeff();
  return c;
}

}  // namespace mfldp
