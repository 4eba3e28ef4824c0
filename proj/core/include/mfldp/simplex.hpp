#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfldp {

using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;
using Mat = Eigen::MatrixXd;

// Thrown for inputs outside an operation's mathematical domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kRenormTol = 1e-9;

// A probability vector on d states. Coordinates are nonnegative and sum to one.
// Construction renormalizes deviations below kRenormTol and rejects larger ones.
class SimplexPoint {
 public:
  explicit SimplexPoint(Vec coords);
  SimplexPoint(std::initializer_list<double> coords);

  static SimplexPoint barycenter(int d);
  static SimplexPoint vertex(int d, int i);
  // Convex combination (1-w)*a + w*b.
  static SimplexPoint mix(const SimplexPoint& a, const SimplexPoint& b, double w);

  int dim() const { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[i]; }
  const Vec& coords() const { return c_; }
  double min_coord() const { return c_.minCoeff(); }
  std::span<const double> span() const { return {c_.data(), static_cast<std::size_t>(c_.size())}; }

  friend bool operator==(const SimplexPoint& a, const SimplexPoint& b) { return a.c_ == b.c_; }

 private:
  Vec c_;
};

// A point of the 1/n lattice inside the simplex.
class LatticePoint {
 public:
  LatticePoint(std::vector<int> counts, int n);

  // Nearest lattice point by largest-remainder rounding.
  static LatticePoint nearest(const SimplexPoint& x, int n);

  int n() const { return n_; }
  int dim() const { return static_cast<int>(counts_.size()); }
  int operator[](int i) const { return counts_[i]; }
  const std::vector<int>& counts() const { return counts_; }
  SimplexPoint to_simplex() const;
  Vec coords() const;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;

 private:
  std::vector<int> counts_;
  int n_;
};

// An integer jump direction e_j - e_i; components sum to zero.
struct JumpDirection {
  IVec delta;

  explicit JumpDirection(IVec d);
  Vec as_real() const { return delta.cast<double>(); }
  bool is_null() const { return delta.isZero(); }
  friend bool operator==(const JumpDirection& a, const JumpDirection& b) { return a.delta == b.delta; }
};

std::string format_direction(const IVec& v);

// Piecewise-linear path on a strictly increasing time grid with simplex knots.
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath(std::vector<double> times, std::vector<SimplexPoint> knots);

  // Constant path at x over [0, t].
  static PiecewiseLinearPath constant(const SimplexPoint& x, double t);
  // Straight segment from a to b over [0, t] with `segments` uniform pieces.
  static PiecewiseLinearPath straight(const SimplexPoint& a, const SimplexPoint& b, double t, int segments);

  std::size_t segments() const { return times_.size() - 1; }
  std::size_t size() const { return times_.size(); }
  int dim() const { return knots_.front().dim(); }
  double t0() const { return times_.front(); }
  double t1() const { return times_.back(); }
  double duration() const { return t1() - t0(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<SimplexPoint>& knots() const { return knots_; }
  const SimplexPoint& front() const { return knots_.front(); }
  const SimplexPoint& back() const { return knots_.back(); }

  Vec velocity(std::size_t segment) const;
  Vec at(double t) const;
  // Same path sampled on a new grid spanning the same interval.
  PiecewiseLinearPath resample(const std::vector<double>& times) const;
  // Time change s -> t0 + (s - t0) * factor applied to the grid.
  PiecewiseLinearPath rescaled(double factor) const;
  double sup_distance(const PiecewiseLinearPath& other) const;

 private:
  std::vector<double> times_;
  std::vector<SimplexPoint> knots_;
};

// Euclidean projection onto the probability simplex.
Vec project_to_simplex(const Vec& p);

// Uniform time grid with `steps` pieces on [0, t], last point exactly t.
std::vector<double> uniform_grid(double t, int steps);

}  // namespace mfldp
