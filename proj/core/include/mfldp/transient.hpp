#pragma once

#include "mfldp/rates.hpp"
#include "mfldp/simplex.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <span>
#include <vector>

namespace mfldp {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::size_t kTransientStateCap = 200'000;

// C(n + d - 1, d - 1), saturating at UINT64_MAX.
std::uint64_t lattice_size(int n, int d);

// Ranks the points of the 1/n lattice in lexicographic order of their counts.
class LatticeIndex {
 public:
  LatticeIndex(int n, int d);

  int n() const { return n_; }
  int d() const { return d_; }
  std::size_t size() const { return size_; }
  std::size_t rank(std::span<const int> counts) const;
  std::span<const int> counts(std::size_t r) const {
    return {states_.data() + r * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }

 private:
  std::uint64_t binom(int a, int b) const;
  int n_;
  int d_;
  std::size_t size_;
  std::vector<std::uint64_t> binom_;  // (n + d + 1) x (d + 1)
  std::vector<int> states_;
};

struct UniformizationResult {
  Vec p;
  double rate = 0.0;             // uniformization rate
  std::size_t terms = 0;         // Poisson terms summed
  double truncation_error = 0;   // Poisson mass left out
  double kernel_row_error = 0;   // max |row sum of the embedded kernel - 1|
};

// Distribution at time T of the chain with generator Q (rows are source
// states, diagonal = -exit rate) started from p0.
UniformizationResult uniformize(const SparseMat& Q, const Vec& p0, double T, double tol = 1e-12);

struct TransientDistribution {
  LatticeIndex index;
  UniformizationResult result;

  double probability(const LatticePoint& x) const;
};

// Generator of the n-particle chain on the whole lattice.
SparseMat lattice_generator(const JumpRateTable& table, const LatticeIndex& index);

TransientDistribution exact_transient(const JumpRateTable& table, const LatticePoint& x0, double T,
                                      std::size_t cap = kTransientStateCap);

}  // namespace mfldp
