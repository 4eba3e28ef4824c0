#pragma once

#include "mfldp/rate_function.hpp"
#include "mfldp/rates.hpp"
#include "mfldp/simplex.hpp"

#include <string>
#include <vector>

namespace mfldp {

inline constexpr const char* kActionScheme = "gauss-legendre-5";

struct ActionReport {
  PiecewiseLinearPath path;
  double value = 0.0;
  std::vector<double> segments;  // contribution of each path segment
  std::string scheme = kActionScheme;
  std::vector<std::size_t> infinite_segments;
  // Quadrature nodes whose local solve hit the iteration cap.
  std::size_t unconverged_nodes = 0;

  bool finite() const { return infinite_segments.empty(); }
};

// Integral of L(x(s), v) over one linear piece from a to b of duration dt,
// with 5-node Gauss-Legendre quadrature. `warm` carries the dual optimizer
// between calls and may be null.
double segment_action(const JumpRateTable& table, const Vec& a, const Vec& b, double dt, Vec* warm = nullptr,
                      std::size_t* unconverged = nullptr);

ActionReport path_action(const JumpRateTable& table, const PiecewiseLinearPath& path);

// Knotwise rho * mu + (1 - rho) * gamma with mu the mean-field trajectory
// started at gamma's first knot, evaluated on gamma's grid.
PiecewiseLinearPath perturb_path(const JumpRateTable& table, const PiecewiseLinearPath& path, double rho);

struct ReparametrizationCheck {
  double c = 1.0;
  double base = 0.0;      // action of the path over its own horizon
  double rescaled = 0.0;  // action of s -> path(c s) over the horizon divided by c
  // max{log(1/c), c log c} (I + R1) + R |V| |1 - 1/c| with R1 = |V| R (e - 1).
  double bound = 0.0;

  double difference() const { return rescaled - base; }
};

ReparametrizationCheck reparametrization_check(const JumpRateTable& table, const PiecewiseLinearPath& path,
                                               double c);

}  // namespace mfldp
