#pragma once

#include "mfldp/model.hpp"
#include "mfldp/simplex.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace mfldp {

// Number of ordered tuples of distinct particles whose states read `tuple`
// in a configuration with empirical measure x: prod_s (n x_s)(n x_s - 1)...(n x_s - m_s + 1).
std::uint64_t tuple_count(int n, std::span<const int> tuple, const LatticePoint& x);

struct OrderedCopy {
  std::vector<int> from;
  std::vector<int> to;
};

// One listed transition contributing to a direction, together with every
// distinct ordered member of its permutation class.
struct RateTerm {
  std::size_t transition;
  int k;
  std::vector<int> source_multiplicity;  // length d
  std::vector<OrderedCopy> copies;
  double inv_k_factorial;
};

struct NegativeSupport {
  std::vector<int> states;        // {i : v_i < 0}
  std::vector<int> multiplicity;  // source multiplicity of each state in the first contributing term
};

// Jump directions v = e_j - e_i with their limit rates lambda_v(x) and
// finite-n rates lambda_v^n(x). Transitions whose rate is identically zero on
// the validation grid, and null directions, are left out.
class JumpRateTable {
 public:
  explicit JumpRateTable(ModelSpec spec);

  const ModelSpec& model() const { return *spec_; }
  int d() const { return spec_->d(); }
  std::size_t size() const { return dirs_.size(); }
  const IVec& direction(std::size_t v) const { return dirs_[v]; }
  // d x |V| matrix whose columns are the directions.
  const Mat& direction_matrix() const { return dir_matrix_; }
  const std::vector<RateTerm>& terms(std::size_t v) const { return terms_[v]; }
  NegativeSupport negative_support(std::size_t v) const;
  std::optional<std::size_t> find(const IVec& v) const;
  double max_direction_norm() const { return max_norm_; }
  const std::vector<std::size_t>& zero_transitions() const { return zero_transitions_; }

  void limit_rates(std::span<const double> x, std::span<double> out) const;
  Vec limit_rates(const Vec& x) const;
  // Sum_v v lambda_v(x).
  Vec drift(const Vec& x) const;

  // xbuf must hold d doubles; out holds size() doubles.
  void finite_rates(int n, std::span<const int> counts, std::span<double> xbuf, std::span<double> out) const;
  Vec finite_rates(const LatticePoint& x) const;

  // Single-transition matrix whose LLN drift equals this table's; diagonal = -row sums.
  Mat effective_matrix(const Vec& x) const;
  // The k = 1 rates Gamma^1(x); diagonal = -row sums.
  Mat single_transition_matrix(const Vec& x) const;

 private:
  std::shared_ptr<const ModelSpec> spec_;
  std::vector<IVec> dirs_;
  Mat dir_matrix_;
  std::vector<std::vector<RateTerm>> terms_;
  struct Flat {
    std::size_t dir;
    std::size_t term;
  };
  std::vector<Flat> flat_;
  std::vector<std::size_t> zero_transitions_;
  double max_norm_ = 0.0;
};

inline Mat effective_matrix(const JumpRateTable& table, const SimplexPoint& x) {
  return table.effective_matrix(x.coords());
}

struct RateEstimateReport {
  double c_hat = 0.0;        // lambda_v <= c_hat prod_{N_v} x_i
  double c0 = 0.0;           // grid minimum of positive transition rates
  double lipschitz = 0.0;    // finite-difference Lipschitz estimate of the transition rates
  double c_bar_lower = 0.0;  // fitted constant of the lower ratio bound
  std::vector<Finding> violations;
};

// Grid checks of the four rate estimates: product upper bound, ratio upper
// bound with (1 + lipschitz/c0 |x-y|), product lower bound with c0/K!, and the
// fitted lower ratio bound with the negative-support exponents.
RateEstimateReport rate_estimate_report(const JumpRateTable& table, int random_pairs = 500);

}  // namespace mfldp
