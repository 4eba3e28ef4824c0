#include "mfldp/lln.hpp"

#include "mfldp/parallel.hpp"
#include "mfldp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mfldp {

Vec drift(const JumpRateTable& table, const SimplexPoint& x) { return table.drift(x.coords()); }

namespace {

Vec checked_drift(const JumpRateTable& table, const Vec& x) {
  Vec f = table.drift(x);
  if (!f.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite drift at x = (" << x.transpose() << ")";
    throw DomainError(msg.str());
  }
  return f;
}

// Clamp negatives and rescale to unit sum; returns whether anything was clamped.
bool renormalize(Vec& x) {
  const bool clamped = (x.array() < 0.0).any();
  if (clamped) x = x.cwiseMax(0.0);
  x /= x.sum();
  return clamped;
}

}  // namespace

LlnTrajectory integrate_lln(const JumpRateTable& table, const SimplexPoint& x0, double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("integrate_lln: horizon and step must be positive");
  if (x0.dim() != table.d()) throw DomainError("integrate_lln: dimension mismatch");
  LlnTrajectory out;
  out.times.push_back(0.0);
  out.states.push_back(x0);
  Vec x = x0.coords();
  const auto steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  double t = 0.0;
  for (long s = 1; s <= steps; ++s) {
    const double next = s == steps ? T : s * dt;
    const double h = next - t;
    const Vec k1 = checked_drift(table, x);
    const Vec k2 = checked_drift(table, x + 0.5 * h * k1);
    const Vec k3 = checked_drift(table, x + 0.5 * h * k2);
    const Vec k4 = checked_drift(table, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (renormalize(x)) ++out.clamp_count;
    t = next;
    out.times.push_back(t);
    out.states.emplace_back(x);
  }
  return out;
}

namespace {

InteriorityFit fit_interiority(const JumpRateTable& table, const SimplexPoint& start, int max_exponent,
                               std::vector<Finding>& findings) {
  const auto traj = integrate_lln(table, start, 1.0, 1e-3);
  const int d = table.d();
  // Knots at t = 0.001 and t = 0.01 give the small-time growth exponent.
  const Vec& early = traj.states[1].coords();
  const Vec& later = traj.states[10].coords();
  const double span = std::log(traj.times[10] / traj.times[1]);
  int D = 0;
  for (int i = 0; i < d; ++i) {
    if (!(early[i] > 0.0) || !(later[i] > 0.0)) continue;
    const double slope = std::log(later[i] / early[i]) / span;
    D = std::max(D, static_cast<int>(std::ceil(slope - 0.25)));
  }
  D = std::clamp(D, 0, max_exponent);
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < traj.times.size(); ++k)
    b = std::min(b, traj.states[k].min_coord() / std::pow(traj.times[k], D));
  for (const double t : {0.01, 0.1, 1.0}) {
    const auto k = static_cast<std::size_t>(std::lround(t / 1e-3));
    const auto& x = traj.states[k];
    for (int i = 0; i < d; ++i)
      if (!(x[i] > 0.0)) {
        std::ostringstream msg;
        msg << "coordinate " << i + 1 << " is not positive at t = " << t;
        findings.push_back({"interiority", "start", msg.str(), start.coords()});
      }
  }
  return {start, b, D};
}

}  // namespace

InteriorityReport interiority_check(const JumpRateTable& table, const std::vector<SimplexPoint>& samples, int jobs) {
  const ModelSpec& spec = table.model();
  std::vector<std::string> failed;
  if (!is_k_ergodic(spec).ergodic) failed.push_back("K-ergodicity");
  if (!check_ue(spec).ok) failed.push_back("uniform positivity");
  if (!check_simjumps(table).ok) failed.push_back("simultaneous-jump condition");
  if (!failed.empty()) {
    std::string msg = "interiority_check: model fails";
    for (std::size_t i = 0; i < failed.size(); ++i) msg += (i ? ", " : " ") + failed[i];
    throw DomainError(msg);
  }
  const int d = table.d();
  std::vector<SimplexPoint> starts;
  for (int i = 0; i < d; ++i) starts.push_back(SimplexPoint::vertex(d, i));
  starts.insert(starts.end(), samples.begin(), samples.end());
  const int max_exponent = static_cast<int>(std::min(std::pow(spec.K(), d), 64.0));

  std::vector<InteriorityFit> fits(starts.size(), {starts.front(), 0.0, 0});
  std::vector<std::vector<Finding>> found(starts.size());
  parallel_for(starts.size(), jobs,
               [&](std::size_t s) { fits[s] = fit_interiority(table, starts[s], max_exponent, found[s]); });
  InteriorityReport rep;
  rep.fits = std::move(fits);
  for (auto& f : found) rep.findings.insert(rep.findings.end(), f.begin(), f.end());
  return rep;
}

}  // namespace mfldp
