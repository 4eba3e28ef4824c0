#pragma once

#include "mfldp/simulate.hpp"
#include "mfldp/transient.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfldp {

// Least squares of decay_n = rate + a / n + b log(n) / n; the intercept is the rate.
struct DecayFit {
  double rate = 0.0;
  double inv_n = 0.0;
  double log_n_over_n = 0.0;
  double residual = 0.0;  // root mean square
  std::size_t points = 0;
};

// Needs at least three distinct n.
DecayFit extrapolate_decay(std::span<const int> ns, std::span<const double> decays);

struct EstimateRow {
  int n = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double decay = 0.0;  // -(1/n) log p_hat
  std::size_t reps = 0;
  std::size_t hits = 0;
  std::string method;  // "mc", "is" or "exact"
  bool censored = false;  // no hits: decay is only known to exceed log(reps)/n
};

struct RareEventEstimate {
  std::vector<EstimateRow> rows;
  std::optional<DecayFit> fit;  // over the rows that are not censored
};

using EventPredicate = std::function<bool(const TrajectorySample&)>;

struct McConfig {
  std::vector<int> ns;
  std::size_t reps = 1000;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  // Importance sampling with this control when set, plain sampling otherwise.
  std::optional<ControlSignal> control;
};

// Replicate r at population n draws from Stream(seed, (n << 32) + r).
std::uint64_t replicate_stream(int n, std::size_t r);

RareEventEstimate mc_rate_estimate(const JumpRateTable& table, const SimplexPoint& x0, double T,
                                   const EventPredicate& event, const McConfig& config);

// P(x^n(T) = nearest lattice point to target), exact by uniformization when the
// lattice fits the cap and by plain sampling otherwise.
RareEventEstimate point_event_estimate(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& target,
                                       double T, const McConfig& config, std::size_t cap = kTransientStateCap);

}  // namespace mfldp
