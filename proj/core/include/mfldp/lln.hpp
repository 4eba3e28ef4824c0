#pragma once

#include "mfldp/rates.hpp"
#include "mfldp/simplex.hpp"

#include <vector>

namespace mfldp {

// Solution of the mean-field ODE x' = sum_v v lambda_v(x) on a fixed grid.
struct LlnTrajectory {
  std::vector<double> times;
  std::vector<SimplexPoint> states;
  // Steps at which a negative coordinate had to be clamped back to zero.
  std::size_t clamp_count = 0;

  PiecewiseLinearPath as_path() const { return {times, states}; }
};

Vec drift(const JumpRateTable& table, const SimplexPoint& x);

// Classical RK4 with step dt, renormalized onto the simplex after every step.
// Knots at every multiple of dt and at T.
LlnTrajectory integrate_lln(const JumpRateTable& table, const SimplexPoint& x0, double T, double dt = 1e-3);

struct InteriorityFit {
  SimplexPoint start;
  double b = 0.0;  // min_i min_t x_i(t) / t^D over (0, 1]
  int D = 0;
};

struct InteriorityReport {
  std::vector<InteriorityFit> fits;
  std::vector<Finding> findings;
};

// Integrates from every vertex and every given start to T = 1 and fits
// x_i(t) >= b t^D. Requires the structural checks to pass.
InteriorityReport interiority_check(const JumpRateTable& table, const std::vector<SimplexPoint>& samples,
                                    int jobs = 1);

}  // namespace mfldp
