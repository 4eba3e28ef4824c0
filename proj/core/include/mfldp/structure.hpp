#pragma once

#include "mfldp/model.hpp"
#include "mfldp/rates.hpp"
#include "mfldp/simplex.hpp"

#include <optional>
#include <vector>

namespace mfldp {

inline constexpr double kZeroRateTol = 1e-12;
inline constexpr double kPositiveRateTol = 1e-9;

// Grid classification of one transition family: identically zero (all values
// below kZeroRateTol), uniformly positive (minimum above kPositiveRateTol) or mixed.
enum class RateClass { Zero, Positive, Mixed };

struct TransitionClass {
  RateClass cls = RateClass::Zero;
  double min = 0.0;
  double max = 0.0;
  std::optional<Vec> argmin;
};

std::vector<TransitionClass> classify_transitions(const ModelSpec& spec);
std::vector<bool> positive_transitions(const ModelSpec& spec);

struct ClosureStep {
  int state;
  std::size_t transition;
};

// States reachable from `source` by positive transitions whose source tuples
// lie inside the set accumulated so far, in the order they were added.
struct AccessibilityClosure {
  int source = 0;
  std::vector<ClosureStep> steps;

  std::vector<int> states() const;
  bool contains(int s) const;
  std::size_t size() const { return steps.size() + 1; }
};

AccessibilityClosure accessibility_closure(const ModelSpec& spec, int u);

struct KErgodicity {
  bool ergodic = false;
  std::vector<AccessibilityClosure> closures;  // one per source state
};

KErgodicity is_k_ergodic(const ModelSpec& spec);

enum class Generator { Single, Effective };

struct SingleErgodicity {
  bool ergodic = false;
  std::optional<Vec> counterexample;
};

// Strong connectivity of the positive-entry graph of Gamma^1 or Gamma^eff at
// every validation grid point; the first failing point is reported.
SingleErgodicity check_single_ergodic(const JumpRateTable& table, Generator which);
SingleErgodicity check_single_ergodic(const ModelSpec& spec, Generator which);

struct UeReport {
  bool ok = false;
  std::vector<TransitionClass> classes;
  std::vector<Finding> findings;
};

UeReport check_ue(const ModelSpec& spec);

struct SimJumpsDiagnosis {
  IVec direction;
  bool property1 = false;  // a positive transition moves exactly |v_i| particles out of each i in N_v
  bool property2 = false;  // all contributing transitions share one source profile supported on N_v
};

struct SimJumpsReport {
  bool ok = false;
  std::vector<SimJumpsDiagnosis> directions;
  std::vector<Finding> findings;
};

SimJumpsReport check_simjumps(const JumpRateTable& table);
SimJumpsReport check_simjumps(const ModelSpec& spec);

// Which sums of C must stay below one.
enum class Substochastic { Rows, Columns };

// Unique nonnegative solution of (I - C) x = y for a nonnegative C with zero
// diagonal whose rows (or columns) sum to less than one.
Vec solve_nonneg_linear(const Mat& C, const Vec& y, Substochastic by = Substochastic::Rows);

struct RepresentationTerm {
  std::size_t transition;
  IVec direction;
  double coefficient;
};

// Nonnegative combination of positive transition directions equal to e_w - e_u.
std::vector<RepresentationTerm> represent_direction(const ModelSpec& spec, int u, int w);

struct StrongCertificate {
  double c;
  int p;
};

// Piecewise-linear path on [0, 1] whose m-th segment has derivative speeds[m] * directions[m].
struct CommunicatingPath {
  PiecewiseLinearPath path;
  std::vector<IVec> directions;
  std::vector<double> speeds;
  std::vector<std::size_t> transitions;
  double length = 0.0;
  // length / |x - y| (or / dist(x, S^a) for boundary escapes).
  double length_constant = 0.0;
  std::optional<StrongCertificate> strong;

  std::size_t segments() const { return directions.size(); }
};

// Euclidean distance from x to {z in S : min_i z_i >= a}.
double distance_to_inner_simplex(const SimplexPoint& x, double a);

// Path from x to y using only positive single-particle transitions.
CommunicatingPath build_path_single_jump(const ModelSpec& spec, const SimplexPoint& x, const SimplexPoint& y);
// Lattice version: consecutive points differ by one single-particle jump of size 1/n.
std::vector<LatticePoint> build_discrete_path_single_jump(const ModelSpec& spec, const LatticePoint& x,
                                                          const LatticePoint& y);

// Path from x into {min_i z_i >= a} along accessibility chains; coordinates
// that decrease stay at or above a. Requires 0 < a <= 1/((K+1)^(d-1) d).
CommunicatingPath build_boundary_escape(const ModelSpec& spec, const SimplexPoint& x, double a);

// Path between two points of {min_i z_i >= a} that stays in {min_i z_i >= a/2}.
CommunicatingPath build_interior_path(const ModelSpec& spec, const SimplexPoint& x, const SimplexPoint& y,
                                      double a);

}  // namespace mfldp
