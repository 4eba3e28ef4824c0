#include "mfldp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mfldp {

namespace {

Vec normalized(Vec c) {
  if (c.size() < 2) throw DomainError("simplex point needs at least 2 coordinates");
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i])) throw DomainError("simplex coordinate is not finite");
    if (c[i] < 0.0) {
      if (c[i] < -kRenormTol) throw DomainError("simplex coordinate is negative");
      c[i] = 0.0;
    }
  }
  const double s = c.sum();
  if (std::abs(s - 1.0) > kRenormTol) throw DomainError("simplex coordinates do not sum to 1");
  if (std::abs(s - 1.0) > 0.0) c /= s;
  return c;
}

}  // namespace

SimplexPoint::SimplexPoint(Vec coords) : c_(normalized(std::move(coords))) {}

SimplexPoint::SimplexPoint(std::initializer_list<double> coords)
    : SimplexPoint(Vec(Eigen::Map<const Vec>(coords.begin(), static_cast<Eigen::Index>(coords.size())))) {}

SimplexPoint SimplexPoint::barycenter(int d) { return SimplexPoint(Vec::Constant(d, 1.0 / d)); }

SimplexPoint SimplexPoint::vertex(int d, int i) {
  Vec c = Vec::Zero(d);
  c[i] = 1.0;
  return SimplexPoint(std::move(c));
}

SimplexPoint SimplexPoint::mix(const SimplexPoint& a, const SimplexPoint& b, double w) {
  return SimplexPoint(((1.0 - w) * a.coords() + w * b.coords()).eval());
}

LatticePoint::LatticePoint(std::vector<int> counts, int n) : counts_(std::move(counts)), n_(n) {
  if (n_ <= 0) throw DomainError("population must be positive");
  if (counts_.size() < 2) throw DomainError("lattice point needs at least 2 states");
  long total = 0;
  for (int c : counts_) {
    if (c < 0) throw DomainError("negative lattice count");
    total += c;
  }
  if (total != n_) throw DomainError("lattice counts do not sum to n");
}

LatticePoint LatticePoint::nearest(const SimplexPoint& x, int n) {
  const int d = x.dim();
  std::vector<int> counts(d);
  std::vector<std::pair<double, int>> rem(d);
  int used = 0;
  for (int i = 0; i < d; ++i) {
    const double s = x[i] * n;
    counts[i] = static_cast<int>(std::floor(s));
    used += counts[i];
    rem[i] = {s - counts[i], i};
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (int r = 0; used < n; ++r, ++used) ++counts[rem[r % d].second];
  return LatticePoint(std::move(counts), n);
}

Vec LatticePoint::coords() const {
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = static_cast<double>(counts_[i]) / n_;
  return c;
}

SimplexPoint LatticePoint::to_simplex() const { return SimplexPoint(coords()); }

JumpDirection::JumpDirection(IVec d) : delta(std::move(d)) {
  if (delta.sum() != 0) throw DomainError("jump direction components must sum to 0");
}

std::string format_direction(const IVec& v) {
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0) continue;
    const int a = std::abs(v[i]);
    if (v[i] < 0) os << "-";
    else if (!first) os << "+";
    if (a != 1) os << a;
    os << "e" << (i + 1);
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

PiecewiseLinearPath::PiecewiseLinearPath(std::vector<double> times, std::vector<SimplexPoint> knots)
    : times_(std::move(times)), knots_(std::move(knots)) {
  if (times_.empty() || times_.size() != knots_.size()) throw DomainError("path needs one knot per grid time");
  for (std::size_t m = 1; m < times_.size(); ++m)
    if (!(times_[m] > times_[m - 1])) throw DomainError("path times must be strictly increasing");
  for (const auto& k : knots_)
    if (k.dim() != knots_.front().dim()) throw DomainError("path knots have inconsistent dimension");
}

PiecewiseLinearPath PiecewiseLinearPath::constant(const SimplexPoint& x, double t) {
  return PiecewiseLinearPath({0.0, t}, {x, x});
}

PiecewiseLinearPath PiecewiseLinearPath::straight(const SimplexPoint& a, const SimplexPoint& b, double t,
                                                  int segments) {
  auto times = uniform_grid(t, segments);
  std::vector<SimplexPoint> knots;
  knots.reserve(times.size());
  for (int m = 0; m <= segments; ++m) knots.push_back(SimplexPoint::mix(a, b, static_cast<double>(m) / segments));
  return PiecewiseLinearPath(std::move(times), std::move(knots));
}

Vec PiecewiseLinearPath::velocity(std::size_t m) const {
  return (knots_[m + 1].coords() - knots_[m].coords()) / (times_[m + 1] - times_[m]);
}

Vec PiecewiseLinearPath::at(double t) const {
  if (t <= times_.front()) return knots_.front().coords();
  if (t >= times_.back()) return knots_.back().coords();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t m = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[m]) / (times_[m + 1] - times_[m]);
  return (1.0 - w) * knots_[m].coords() + w * knots_[m + 1].coords();
}

PiecewiseLinearPath PiecewiseLinearPath::resample(const std::vector<double>& times) const {
  std::vector<SimplexPoint> knots;
  knots.reserve(times.size());
  for (double t : times) knots.emplace_back(at(t));
  return PiecewiseLinearPath(times, std::move(knots));
}

PiecewiseLinearPath PiecewiseLinearPath::rescaled(double factor) const {
  std::vector<double> t(times_.size());
  for (std::size_t m = 0; m < t.size(); ++m) t[m] = times_.front() + (times_[m] - times_.front()) * factor;
  return PiecewiseLinearPath(std::move(t), knots_);
}

double PiecewiseLinearPath::sup_distance(const PiecewiseLinearPath& other) const {
  std::vector<double> grid = times_;
  grid.insert(grid.end(), other.times_.begin(), other.times_.end());
  std::sort(grid.begin(), grid.end());
  double best = 0.0;
  for (double t : grid) best = std::max(best, (at(t) - other.at(t)).cwiseAbs().maxCoeff());
  return best;
}

std::vector<double> uniform_grid(double t, int steps) {
  if (steps < 1 || !(t > 0.0)) throw DomainError("uniform grid needs t > 0 and at least one step");
  std::vector<double> g(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) g[m] = t * m / steps;
  g.back() = t;
  return g;
}

Vec project_to_simplex(const Vec& p) {
  Vec s = p;
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) tau = t;
  }
  return (p.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace mfldp
