#include "mfldp/transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfldp {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

}  // namespace

std::uint64_t lattice_size(int n, int d) {
  if (n < 0 || d < 1) throw DomainError("lattice_size: needs n >= 0 and d >= 1");
  // C(n + d - 1, d - 1) built up one factor at a time so intermediates stay exact.
  std::uint64_t c = 1;
  for (int k = 1; k < d; ++k) {
    const std::uint64_t next = mul_sat(c, static_cast<std::uint64_t>(n + k));
    if (next == kSaturated) return kSaturated;
    c = next / static_cast<std::uint64_t>(k);
  }
  return c;
}

LatticeIndex::LatticeIndex(int n, int d) : n_(n), d_(d) {
  if (n < 1 || d < 2) throw DomainError("LatticeIndex: needs n >= 1 and d >= 2");
  const std::uint64_t total = lattice_size(n, d);
  if (total > (std::uint64_t{1} << 32)) throw DomainError("LatticeIndex: lattice too large to enumerate");
  size_ = static_cast<std::size_t>(total);
  const int rows = n + d + 1;
  binom_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(d + 1), 0);
  for (int a = 0; a < rows; ++a) {
    binom_[static_cast<std::size_t>(a * (d + 1))] = 1;
    for (int b = 1; b <= std::min(a, d); ++b)
      binom_[static_cast<std::size_t>(a * (d + 1) + b)] =
          binom_[static_cast<std::size_t>((a - 1) * (d + 1) + b - 1)] +
          (b <= a - 1 ? binom_[static_cast<std::size_t>((a - 1) * (d + 1) + b)] : 0);
  }
  states_.reserve(size_ * static_cast<std::size_t>(d));
  std::vector<int> c(static_cast<std::size_t>(d), 0);
  // Lexicographic enumeration: the first coordinate varies slowest.
  auto emit = [&](auto&& self, int i, int left) -> void {
    if (i == d - 1) {
      c[static_cast<std::size_t>(i)] = left;
      states_.insert(states_.end(), c.begin(), c.end());
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, left - v);
    }
  };
  emit(emit, 0, n);
}

std::uint64_t LatticeIndex::binom(int a, int b) const {
  if (b < 0 || a < 0 || b > a) return 0;
  return binom_[static_cast<std::size_t>(a * (d_ + 1) + b)];
}

std::size_t LatticeIndex::rank(std::span<const int> counts) const {
  // Points preceding `counts` share its first i coordinates and have a smaller
  // (i+1)-th; compositions of m into p parts number C(m + p - 1, p - 1), and the
  // hockey-stick identity sums them over the smaller values in one step.
  std::uint64_t r = 0;
  int left = n_;
  for (int i = 0; i + 1 < d_; ++i) {
    const int c = counts[static_cast<std::size_t>(i)];
    const int k = d_ - i - 2;
    r += binom(left + k + 1, k + 1) - binom(left - c + k + 1, k + 1);
    left -= c;
  }
  return static_cast<std::size_t>(r);
}

UniformizationResult uniformize(const SparseMat& Q, const Vec& p0, double T, double tol) {
  if (Q.rows() != Q.cols() || Q.rows() != p0.size()) throw DomainError("uniformize: shape mismatch");
  if (!(T >= 0.0)) throw DomainError("uniformize: time must be nonnegative");
  UniformizationResult out;
  double rate = 0.0;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) rate = std::max(rate, -Q.coeff(i, i));
  out.rate = rate;
  if (T == 0.0 || rate == 0.0) {
    out.p = p0;
    return out;
  }
  // Embedded kernel P = I + Q / rate, applied to row vectors as P^T p.
  SparseMat P = Q / rate;
  for (Eigen::Index i = 0; i < P.rows(); ++i) P.coeffRef(i, i) += 1.0;
  const Vec row_sums = P * Vec::Ones(P.cols());
  out.kernel_row_error = (row_sums.array() - 1.0).abs().maxCoeff();
  const Eigen::SparseMatrix<double> Pt = P.transpose();

  const double lt = rate * T;
  const auto cap = static_cast<std::size_t>(lt + 20.0 * std::sqrt(lt) + 200.0);
  Vec term = p0;
  out.p = Vec::Zero(p0.size());
  double mass = 0.0;
  std::size_t k = 0;
  for (; k < cap; ++k) {
    const double w = std::exp(-lt + static_cast<double>(k) * std::log(lt) - std::lgamma(static_cast<double>(k) + 1.0));
    out.p += w * term;
    mass += w;
    if (1.0 - mass <= tol && static_cast<double>(k) >= lt) break;
    term = Pt * term;
  }
  out.terms = k + 1;
  out.truncation_error = std::max(0.0, 1.0 - mass);
  return out;
}

double TransientDistribution::probability(const LatticePoint& x) const {
  if (x.n() != index.n() || x.dim() != index.d()) throw DomainError("probability: lattice point does not match");
  return result.p[static_cast<Eigen::Index>(index.rank(x.counts()))];
}

SparseMat lattice_generator(const JumpRateTable& table, const LatticeIndex& index) {
  const int d = table.d();
  const int n = index.n();
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> xbuf(static_cast<std::size_t>(d)), lam(table.size());
  std::vector<int> target(static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto c = index.counts(r);
    table.finite_rates(n, c, xbuf, lam);
    double out_rate = 0.0;
    for (std::size_t v = 0; v < lam.size(); ++v) {
      if (lam[v] < -1e-12) throw DomainError("negative jump rate encountered");
      if (lam[v] <= 0.0) continue;
      const IVec& delta = table.direction(v);
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        target[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] + delta[i];
        ok = ok && target[static_cast<std::size_t>(i)] >= 0;
      }
      if (!ok) throw DomainError("positive rate for a jump leaving the lattice");
      const double q = n * lam[v];
      trips.emplace_back(static_cast<int>(r), static_cast<int>(index.rank(target)), q);
      out_rate += q;
    }
    trips.emplace_back(static_cast<int>(r), static_cast<int>(r), -out_rate);
  }
  const auto N = static_cast<Eigen::Index>(index.size());
  SparseMat Q(N, N);
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

TransientDistribution exact_transient(const JumpRateTable& table, const LatticePoint& x0, double T,
                                      std::size_t cap) {
  if (x0.dim() != table.d()) throw DomainError("exact_transient: dimension mismatch");
  if (lattice_size(x0.n(), x0.dim()) > cap) throw DomainError("exact_transient: state space exceeds the cap");
  LatticeIndex index(x0.n(), x0.dim());
  Vec p0 = Vec::Zero(static_cast<Eigen::Index>(index.size()));
  p0[static_cast<Eigen::Index>(index.rank(x0.counts()))] = 1.0;
  UniformizationResult res = uniformize(lattice_generator(table, index), p0, T);
  return {std::move(index), std::move(res)};
}

}  // namespace mfldp
