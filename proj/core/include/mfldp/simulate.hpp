#pragma once

#include "mfldp/action.hpp"
#include "mfldp/rates.hpp"
#include "mfldp/rng.hpp"
#include "mfldp/simplex.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mfldp {

// One sample path of the n-particle empirical measure on [0, horizon].
// State m holds from times[m] until times[m + 1] (or the horizon).
struct TrajectorySample {
  int n = 0;
  int d = 0;
  double horizon = 0.0;
  std::uint64_t stream = 0;
  std::vector<double> times;               // 0, then the jump times
  std::vector<int> counts;                 // d counts per state, flattened
  std::vector<std::size_t> directions;     // direction index of each jump

  std::size_t jumps() const { return directions.size(); }
  std::size_t states() const { return times.size(); }
  std::span<const int> counts_at(std::size_t m) const {
    return {counts.data() + m * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
  LatticePoint state(std::size_t m) const;
  LatticePoint final_state() const { return state(states() - 1); }
  // State index in force at time t.
  std::size_t index_at(double t) const;
  Vec coords_at(double t) const;
};

// Exact CTMC sample by the Gillespie algorithm.
TrajectorySample gillespie_run(const JumpRateTable& table, const LatticePoint& x0, double T, Stream& rng);

// Largest coordinate deviation from a reference path over the jump times of the sample.
double sup_deviation(const TrajectorySample& s, const PiecewiseLinearPath& reference);

// Piecewise-constant intensities alpha_v(t) per unit n on the pieces of `times`.
struct ControlSignal {
  std::vector<double> times;  // piece boundaries, times.front() = 0
  Mat rates;                  // |V| x pieces
  double bound = 0.0;         // declared upper bound of the rates

  std::size_t pieces() const { return times.size() - 1; }
  std::size_t piece_at(double t) const;
};

struct ControlledSample {
  TrajectorySample path;
  // log dP/dQ of the nominal law against the controlled law along the sample.
  double log_lr = 0.0;
  std::size_t suppressed = 0;  // controlled jumps that would have left the lattice
};

ControlledSample controlled_run(const JumpRateTable& table, const LatticePoint& x0, double T,
                                const ControlSignal& control, Stream& rng);

// Intensities chosen from the current time and state, held until the next jump.
using FeedbackControl = std::function<void(double t, std::span<const int> counts, std::span<double> alpha)>;
ControlledSample controlled_run(const JumpRateTable& table, const LatticePoint& x0, double T,
                                const FeedbackControl& control, Stream& rng);

// alpha_v on each segment of the path is the minimizing flow q_v at the
// segment midpoint, clipped below at 1e-12.
ControlSignal build_tilt_control(const JumpRateTable& table, const ActionReport& optimal);

}  // namespace mfldp
