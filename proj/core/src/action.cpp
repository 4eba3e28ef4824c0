#include "mfldp/action.hpp"

#include "mfldp/lln.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mfldp {

namespace {

// Gauss-Legendre nodes and weights mapped to [0, 1].
constexpr std::array<double, 5> kNodes = {
    0.5 * (1.0 - 0.9061798459386640), 0.5 * (1.0 - 0.5384693101056831), 0.5,
    0.5 * (1.0 + 0.5384693101056831), 0.5 * (1.0 + 0.9061798459386640)};
constexpr std::array<double, 5> kWeights = {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665,
                                            0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
                                            0.5 * 0.2369268850561891};

}  // namespace

double segment_action(const JumpRateTable& table, const Vec& a, const Vec& b, double dt, Vec* warm,
                      std::size_t* unconverged) {
  if (!(dt > 0.0)) throw DomainError("segment_action: duration must be positive");
  const Vec beta = (b - a) / dt;
  double sum = 0.0;
  for (std::size_t k = 0; k < kNodes.size(); ++k) {
    const Vec x = a + kNodes[k] * (b - a);
    const LocalRateResult r = local_rate(table, table.limit_rates(x), beta, {}, warm);
    if (r.status == SolveStatus::Infinite) return kInf;
    if (r.status == SolveStatus::NotConverged && unconverged) ++*unconverged;
    if (warm) *warm = r.theta;
    sum += kWeights[k] * r.value;
  }
  return sum * dt;
}

ActionReport path_action(const JumpRateTable& table, const PiecewiseLinearPath& path) {
  if (path.dim() != table.d()) throw DomainError("path_action: dimension mismatch");
  ActionReport rep{path, 0.0, {}, kActionScheme, {}, 0};
  rep.segments.resize(path.segments());
  Vec warm = Vec::Zero(table.d());
  for (std::size_t m = 0; m < path.segments(); ++m) {
    const double dt = path.times()[m + 1] - path.times()[m];
    const double v = segment_action(table, path.knots()[m].coords(), path.knots()[m + 1].coords(), dt, &warm,
                                    &rep.unconverged_nodes);
    rep.segments[m] = v;
    if (!std::isfinite(v)) {
      rep.infinite_segments.push_back(m);
      warm.setZero();
    }
  }
  rep.value = 0.0;
  for (double v : rep.segments) rep.value += v;
  return rep;
}

PiecewiseLinearPath perturb_path(const JumpRateTable& table, const PiecewiseLinearPath& path, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("perturb_path: rho must lie in [0, 1]");
  const double T = path.duration();
  const double dt = std::min(1e-3, T / 10.0);
  const PiecewiseLinearPath mu = integrate_lln(table, path.front(), T, dt).as_path();
  std::vector<SimplexPoint> knots;
  knots.reserve(path.size());
  for (std::size_t m = 0; m < path.size(); ++m) {
    const double s = std::clamp(path.times()[m] - path.t0(), 0.0, T);
    const Vec x = rho * mu.at(s) + (1.0 - rho) * path.knots()[m].coords();
    knots.emplace_back(x / x.sum());
  }
  knots.front() = path.front();
  return {path.times(), std::move(knots)};
}

ReparametrizationCheck reparametrization_check(const JumpRateTable& table, const PiecewiseLinearPath& path,
                                               double c) {
  if (!(c >= 0.5 && c <= 2.0)) throw DomainError("reparametrization_check: c must lie in [0.5, 2]");
  ReparametrizationCheck out;
  out.c = c;
  out.base = path_action(table, path).value;
  if (!std::isfinite(out.base)) throw DomainError("reparametrization_check: path has infinite action");
  out.rescaled = path_action(table, path.rescaled(1.0 / c)).value;
  const double R = max_direction_rate(table);
  const double V = static_cast<double>(table.size());
  const double R1 = V * R * (std::exp(1.0) - 1.0);
  const double factor = std::max(std::log(1.0 / c), c * std::log(c));
  out.bound = factor * (out.base + R1) + R * V * std::abs(1.0 - 1.0 / c);
  return out;
}

}  // namespace mfldp
