#include "mfldp/estimate.hpp"

#include "mfldp/parallel.hpp"

#include <Eigen/QR>

#include <cmath>
#include <set>

namespace mfldp {

DecayFit extrapolate_decay(std::span<const int> ns, std::span<const double> decays) {
  if (ns.size() != decays.size()) throw DomainError("extrapolate_decay: size mismatch");
  if (std::set<int>(ns.begin(), ns.end()).size() < 3) throw DomainError("extrapolate_decay: needs three distinct n");
  const auto m = static_cast<Eigen::Index>(ns.size());
  Mat A(m, 3);
  Vec y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double n = ns[static_cast<std::size_t>(i)];
    if (!(n > 1.0)) throw DomainError("extrapolate_decay: n must exceed 1");
    A(i, 0) = 1.0;
    A(i, 1) = 1.0 / n;
    A(i, 2) = std::log(n) / n;
    y[i] = decays[static_cast<std::size_t>(i)];
  }
  const Vec c = A.colPivHouseholderQr().solve(y);
  DecayFit f;
  f.rate = c[0];
  f.inv_n = c[1];
  f.log_n_over_n = c[2];
  f.residual = std::sqrt((A * c - y).squaredNorm() / static_cast<double>(m));
  f.points = static_cast<std::size_t>(m);
  return f;
}

std::uint64_t replicate_stream(int n, std::size_t r) {
  return (static_cast<std::uint64_t>(n) << 32) + static_cast<std::uint64_t>(r);
}

namespace {

void finish_row(EstimateRow& row) {
  row.censored = !(row.p_hat > 0.0);
  row.decay = row.censored ? kInf : -std::log(row.p_hat) / row.n;
}

void add_fit(RareEventEstimate& est) {
  std::vector<int> ns;
  std::vector<double> decays;
  for (const auto& r : est.rows)
    if (!r.censored) {
      ns.push_back(r.n);
      decays.push_back(r.decay);
    }
  if (std::set<int>(ns.begin(), ns.end()).size() >= 3) est.fit = extrapolate_decay(ns, decays);
}

}  // namespace

RareEventEstimate mc_rate_estimate(const JumpRateTable& table, const SimplexPoint& x0, double T,
                                   const EventPredicate& event, const McConfig& config) {
  if (config.reps < 100) throw DomainError("mc_rate_estimate: at least 100 replicates are needed");
  if (config.ns.empty()) throw DomainError("mc_rate_estimate: no population sizes given");
  RareEventEstimate est;
  for (int n : config.ns) {
    const LatticePoint start = LatticePoint::nearest(x0, n);
    std::vector<double> weight(config.reps, 0.0);
    parallel_for(config.reps, config.jobs, [&](std::size_t r) {
      Stream rng(config.seed, replicate_stream(n, r));
      if (config.control) {
        const ControlledSample s = controlled_run(table, start, T, *config.control, rng);
        if (event(s.path)) weight[r] = std::exp(s.log_lr);
      } else if (event(gillespie_run(table, start, T, rng))) {
        weight[r] = 1.0;
      }
    });
    EstimateRow row;
    row.n = n;
    row.reps = config.reps;
    row.method = config.control ? "is" : "mc";
    double sum = 0.0, sq = 0.0;
    for (double w : weight) {
      sum += w;
      sq += w * w;
      row.hits += w > 0.0;
    }
    const double reps = static_cast<double>(config.reps);
    row.p_hat = sum / reps;
    const double var = std::max(0.0, sq / reps - row.p_hat * row.p_hat) * reps / (reps - 1.0);
    row.std_error = std::sqrt(var / reps);
    finish_row(row);
    est.rows.push_back(row);
  }
  add_fit(est);
  return est;
}

RareEventEstimate point_event_estimate(const JumpRateTable& table, const SimplexPoint& x0, const SimplexPoint& target,
                                       double T, const McConfig& config, std::size_t cap) {
  RareEventEstimate est;
  for (int n : config.ns) {
    const LatticePoint start = LatticePoint::nearest(x0, n);
    const LatticePoint goal = LatticePoint::nearest(target, n);
    if (lattice_size(n, table.d()) <= cap) {
      const TransientDistribution dist = exact_transient(table, start, T, cap);
      EstimateRow row;
      row.n = n;
      row.method = "exact";
      row.p_hat = dist.probability(goal);
      row.std_error = dist.result.truncation_error;
      finish_row(row);
      est.rows.push_back(row);
    } else {
      McConfig one = config;
      one.ns = {n};
      const auto sampled = mc_rate_estimate(table, x0, T, [&](const TrajectorySample& s) {
        return s.final_state() == goal;
      }, one);
      est.rows.push_back(sampled.rows.front());
    }
  }
  add_fit(est);
  return est;
}

}  // namespace mfldp
