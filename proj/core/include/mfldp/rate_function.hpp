#pragma once

#include "mfldp/rates.hpp"
#include "mfldp/simplex.hpp"

#include <limits>
#include <optional>

namespace mfldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// r log r - r + 1, with 0 log 0 = 0 and +inf for negative r.
double poisson_ell(double r);

struct HamiltonianValue {
  double value = 0.0;
  Vec gradient;  // sum_v v lambda_v e^<theta,v>
  Mat hessian;   // sum_v v v^T lambda_v e^<theta,v>
};

// Exponents <theta, v> are capped at kExponentCap before exponentiation.
inline constexpr double kExponentCap = 700.0;

double hamiltonian(const JumpRateTable& table, const SimplexPoint& x, const Vec& theta);
HamiltonianValue hamiltonian_derivatives(const JumpRateTable& table, const SimplexPoint& x, const Vec& theta);

enum class SolveStatus { Converged, Infinite, NotConverged };

struct LocalRateResult {
  double value = 0.0;
  SolveStatus status = SolveStatus::Converged;
  Vec theta;  // dual optimizer, components sum to zero
  Vec q;      // primal flow per direction of the table
  int iterations = 0;
  double gradient_norm = 0.0;
  // Unit ascent direction of the dual objective when the value is infinite.
  std::optional<Vec> ascent;

  bool finite() const { return status == SolveStatus::Converged; }
};

struct LocalRateOptions {
  int max_iterations = 200;
  double tolerance = 1e-11;
  double divergence_norm = 1e3;
};

// L(x, beta) = sup_theta <theta, beta> - H(x, theta), by damped Newton on the sum-zero subspace.
LocalRateResult local_rate(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta,
                           const LocalRateOptions& opts = {}, const Vec* warm_start = nullptr);
// Same inputs through the rates directly: the values of the table at x.
LocalRateResult local_rate(const JumpRateTable& table, const Vec& rates, const Vec& beta,
                           const LocalRateOptions& opts = {}, const Vec* warm_start = nullptr);

// min sum_v lambda_v l(q_v / lambda_v) subject to sum_v v q_v = beta, q >= 0,
// solved directly in the flow variables.
LocalRateResult local_rate_primal(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta,
                                  const LocalRateOptions& opts = {});

// Nonnegative least squares min |A q - b| over q >= 0 (Lawson-Hanson).
Vec nonneg_least_squares(const Mat& A, const Vec& b);

struct SuperlinearityCheck {
  bool holds = false;
  double value = 0.0;  // L(x, beta)
  double bound = 0.0;  // |beta| log|beta| / max|v| - R |V| |beta|
  double R = 0.0;      // grid maximum of the direction rates
};

SuperlinearityCheck superlinearity_bound_check(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta);

// Grid maximum over directions and validation points of lambda_v(x).
double max_direction_rate(const JumpRateTable& table);

// Relative entropy sum mu_i log(mu_i / nu_i); +inf when mu is not absolutely continuous w.r.t. nu.
double sanov_cost(const SimplexPoint& mu0, const SimplexPoint& nu);

}  // namespace mfldp
