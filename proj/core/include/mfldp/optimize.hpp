#pragma once

#include "mfldp/action.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfldp {

struct MinimizeOptions {
  int knots = 50;  // including both endpoints
  int max_iterations = 400;
  double fd_step = 1e-6;
  // Stop after three consecutive iterations improving by less than this (relative).
  double tolerance = 1e-10;
  std::vector<double> rhos{1e-2, 1e-3};
  int jobs = 1;
};

struct StartOutcome {
  std::string label;
  double initial = kInf;
  double value = kInf;
  int iterations = 0;
  bool converged = false;
};

struct MinimizeReport {
  ActionReport best;
  std::string start;  // label of the start that produced `best`
  std::vector<StartOutcome> starts;
  int iterations = 0;
  bool converged = false;

  double value() const { return best.value; }
};

// Upper bound on the minimal action from x0 to xT over [0, t], t in (0, 1]:
// projected gradient descent on the interior knots of a uniform grid, started
// from the straight line, the mean-field path followed by an interior bridge,
// and perturbed straight lines for each rho.
MinimizeReport minimize_action(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& xT,
                               double t, const MinimizeOptions& opts = {});

// Same objective for any horizon t > 0.
MinimizeReport minimize_action_horizon(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& xT,
                                       double t, const MinimizeOptions& opts = {});

// Descends from a given path, keeping its time grid and endpoints.
StartOutcome refine_path(const JumpRateTable& table, PiecewiseLinearPath& path, const MinimizeOptions& opts = {});

struct QuasipotentialOptions {
  std::vector<double> horizons{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  MinimizeOptions minimize;
};

struct QuasipotentialResult {
  double value = kInf;
  std::optional<PiecewiseLinearPath> path;  // empty when no start has finite action
  double horizon = 0.0;
  std::string source;  // "constant", "horizon=T" or "via=<waypoint index>"
};

// Minimum action over the horizon grid. Results are cached, and every cached
// pair x -> y, y -> z seeds the solve x -> z with the concatenated path.
class QuasipotentialSolver {
 public:
  explicit QuasipotentialSolver(const JumpRateTable& table, QuasipotentialOptions opts = {});

  QuasipotentialResult solve(const SimplexPoint& x, const SimplexPoint& y);

  struct Entry {
    SimplexPoint from;
    SimplexPoint to;
    QuasipotentialResult result;
  };
  const std::vector<Entry>& cache() const { return cache_; }

 private:
  const JumpRateTable& table_;
  QuasipotentialOptions opts_;
  std::vector<Entry> cache_;
};

QuasipotentialResult quasipotential(const JumpRateTable& table, const SimplexPoint& x, const SimplexPoint& y,
                                    const QuasipotentialOptions& opts = {});

}  // namespace mfldp
