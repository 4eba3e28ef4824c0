#include "mfldp/rates.hpp"

#include "mfldp/grid.hpp"
#include "mfldp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace mfldp {

std::uint64_t tuple_count(int n, std::span<const int> tuple, const LatticePoint& x) {
  if (x.n() != n) throw DomainError("tuple_count: lattice point has population " + std::to_string(x.n()) +
                                    ", expected " + std::to_string(n));
  std::vector<int> mult(static_cast<std::size_t>(x.dim()), 0);
  for (int s : tuple) {
    if (s < 0 || s >= x.dim()) throw DomainError("tuple_count: state out of range");
    ++mult[static_cast<std::size_t>(s)];
  }
  std::uint64_t total = 1;
  for (int s = 0; s < x.dim(); ++s) {
    for (int r = 0; r < mult[static_cast<std::size_t>(s)]; ++r) {
      const long f = static_cast<long>(x[s]) - r;
      if (f <= 0) return 0;
      if (total > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(f))
        throw DomainError("tuple_count overflow");
      total *= static_cast<std::uint64_t>(f);
    }
  }
  return total;
}

namespace {

std::vector<OrderedCopy> ordered_copies(const TupleTransition& tr, bool symmetrize) {
  if (!symmetrize) return {OrderedCopy{tr.from, tr.to}};
  std::vector<int> perm(static_cast<std::size_t>(tr.k()));
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  std::vector<OrderedCopy> out;
  do {
    OrderedCopy c;
    for (int p : perm) {
      c.from.push_back(tr.from[static_cast<std::size_t>(p)]);
      c.to.push_back(tr.to[static_cast<std::size_t>(p)]);
    }
    if (seen.emplace(c.from, c.to).second) out.push_back(std::move(c));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JumpRateTable::JumpRateTable(ModelSpec spec) : spec_(std::make_shared<const ModelSpec>(std::move(spec))) {
  const int d = spec_->d();
  const auto grid = validation_grid(d);
  const auto& trs = spec_->transitions();
  for (std::size_t t = 0; t < trs.size(); ++t) {
    const auto& tr = trs[t];
    const IVec v = tr.direction(d);
    if (v.isZero()) continue;
    const bool zero = std::all_of(grid.begin(), grid.end(),
                                  [&](const SimplexPoint& x) { return std::abs(tr.rate.eval(x.span())) < 1e-12; });
    if (zero) {
      zero_transitions_.push_back(t);
      continue;
    }
    auto idx = find(v);
    if (!idx) {
      dirs_.push_back(v);
      terms_.emplace_back();
      idx = dirs_.size() - 1;
    }
    RateTerm term;
    term.transition = t;
    term.k = tr.k();
    term.source_multiplicity.assign(static_cast<std::size_t>(d), 0);
    for (int s : tr.from) ++term.source_multiplicity[static_cast<std::size_t>(s)];
    term.copies = ordered_copies(tr, spec_->symmetrize());
    term.inv_k_factorial = 1.0 / factorial(tr.k());
    terms_[*idx].push_back(std::move(term));
  }
  dir_matrix_.resize(d, static_cast<Eigen::Index>(dirs_.size()));
  for (std::size_t v = 0; v < dirs_.size(); ++v) {
    dir_matrix_.col(static_cast<Eigen::Index>(v)) = dirs_[v].cast<double>();
    max_norm_ = std::max(max_norm_, dir_matrix_.col(static_cast<Eigen::Index>(v)).norm());
    for (std::size_t q = 0; q < terms_[v].size(); ++q) flat_.push_back({v, q});
  }
}

std::optional<std::size_t> JumpRateTable::find(const IVec& v) const {
  for (std::size_t i = 0; i < dirs_.size(); ++i)
    if (dirs_[i] == v) return i;
  return std::nullopt;
}

NegativeSupport JumpRateTable::negative_support(std::size_t v) const {
  NegativeSupport ns;
  for (int i = 0; i < d(); ++i)
    if (dirs_[v][i] < 0) {
      ns.states.push_back(i);
      ns.multiplicity.push_back(terms_[v].front().source_multiplicity[static_cast<std::size_t>(i)]);
    }
  return ns;
}

void JumpRateTable::limit_rates(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& trs = spec_->transitions();
  for (const auto& f : flat_) {
    const RateTerm& term = terms_[f.dir][f.term];
    const auto& tr = trs[term.transition];
    double prod = 1.0;
    for (int s : tr.from) prod *= x[static_cast<std::size_t>(s)];
    if (prod == 0.0) continue;
    out[f.dir] += static_cast<double>(term.copies.size()) * prod * tr.rate.eval(x) * term.inv_k_factorial;
  }
}

Vec JumpRateTable::limit_rates(const Vec& x) const {
  Vec out(static_cast<Eigen::Index>(size()));
  limit_rates({x.data(), static_cast<std::size_t>(x.size())}, {out.data(), size()});
  return out;
}

Vec JumpRateTable::drift(const Vec& x) const { return dir_matrix_ * limit_rates(x); }

void JumpRateTable::finite_rates(int n, std::span<const int> counts, std::span<double> xbuf,
                                 std::span<double> out) const {
  const double inv_n = 1.0 / n;
  for (int i = 0; i < d(); ++i) xbuf[static_cast<std::size_t>(i)] = counts[static_cast<std::size_t>(i)] * inv_n;
  std::fill(out.begin(), out.end(), 0.0);
  const auto& trs = spec_->transitions();
  for (const auto& f : flat_) {
    const RateTerm& term = terms_[f.dir][f.term];
    double a = 1.0;
    for (int s = 0; s < d() && a > 0.0; ++s) {
      const int m = term.source_multiplicity[static_cast<std::size_t>(s)];
      const int c = counts[static_cast<std::size_t>(s)];
      for (int r = 0; r < m; ++r) a *= (c - r > 0) ? static_cast<double>(c - r) : 0.0;
    }
    if (a == 0.0) continue;
    double scale = 1.0;
    for (int r = 0; r < term.k; ++r) scale *= inv_n;
    // A_k * n^(1-k) Gamma / (n k!) = A_k Gamma / (n^k k!)
    out[f.dir] += static_cast<double>(term.copies.size()) * a * scale * term.inv_k_factorial *
                  trs[term.transition].rate.eval(xbuf);
  }
}

Vec JumpRateTable::finite_rates(const LatticePoint& x) const {
  if (x.dim() != d()) throw DomainError("lattice point dimension does not match the model");
  Vec out(static_cast<Eigen::Index>(size()));
  std::vector<double> xbuf(static_cast<std::size_t>(d()));
  finite_rates(x.n(), x.counts(), xbuf, {out.data(), size()});
  return out;
}

Mat JumpRateTable::effective_matrix(const Vec& x) const {
  const int dd = d();
  Mat g = Mat::Zero(dd, dd);
  const auto& trs = spec_->transitions();
  const std::span<const double> xs{x.data(), static_cast<std::size_t>(x.size())};
  for (const auto& f : flat_) {
    const RateTerm& term = terms_[f.dir][f.term];
    const double rate = trs[term.transition].rate.eval(xs);
    for (const auto& c : term.copies) {
      for (int l = 0; l < term.k; ++l) {
        double prod = 1.0;
        for (int r = 0; r < term.k; ++r)
          if (r != l) prod *= x[c.from[static_cast<std::size_t>(r)]];
        g(c.from[static_cast<std::size_t>(l)], c.to[static_cast<std::size_t>(l)]) += term.inv_k_factorial * prod * rate;
      }
    }
  }
  for (int i = 0; i < dd; ++i) {
    g(i, i) = 0.0;
    g(i, i) = -g.row(i).sum();
  }
  return g;
}

Mat JumpRateTable::single_transition_matrix(const Vec& x) const {
  const int dd = d();
  Mat g = Mat::Zero(dd, dd);
  const std::span<const double> xs{x.data(), static_cast<std::size_t>(x.size())};
  for (const auto& tr : spec_->transitions())
    if (tr.k() == 1) g(tr.from[0], tr.to[0]) += tr.rate.eval(xs);
  for (int i = 0; i < dd; ++i) {
    g(i, i) = 0.0;
    g(i, i) = -g.row(i).sum();
  }
  return g;
}

RateEstimateReport rate_estimate_report(const JumpRateTable& table, int random_pairs) {
  RateEstimateReport rep;
  const int d = table.d();
  const auto grid = validation_grid(d);
  const auto& spec = table.model();
  const int K = spec.K();
  auto note = [&](std::string check, std::string subject, std::string detail, const Vec& x) {
    rep.violations.push_back({std::move(check), std::move(subject), std::move(detail), x});
  };

  // c0 over the uniformly positive transition families.
  rep.c0 = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> live;
  for (std::size_t v = 0; v < table.size(); ++v)
    for (const auto& term : table.terms(v)) live.push_back(term.transition);
  for (std::size_t t : live) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& x : grid) lo = std::min(lo, spec.transitions()[t].rate.eval(x.span()));
    if (lo > 1e-9) rep.c0 = std::min(rep.c0, lo);
  }
  if (!std::isfinite(rep.c0)) rep.c0 = 0.0;
  const double kfact = [&] {
    double f = 1.0;
    for (int i = 2; i <= K; ++i) f *= i;
    return f;
  }();

  for (const auto& x : grid) {
    const Vec lam = table.limit_rates(x.coords());
    double all_prod = 1.0;
    for (int i = 0; i < d; ++i) all_prod *= std::pow(x[i], K);
    for (std::size_t v = 0; v < table.size(); ++v) {
      const auto ns = table.negative_support(v);
      double p = 1.0;
      for (int i : ns.states) p *= x[i];
      if (p > 0.0) rep.c_hat = std::max(rep.c_hat, lam[static_cast<Eigen::Index>(v)] / p);
      else if (lam[static_cast<Eigen::Index>(v)] > 1e-12)
        note("product-upper", format_direction(table.direction(v)), "rate positive where a negative-support coordinate vanishes",
             x.coords());
      if (lam[static_cast<Eigen::Index>(v)] < rep.c0 / kfact * all_prod - 1e-12)
        note("product-lower", format_direction(table.direction(v)), "rate below c0/K! prod x_i^K", x.coords());
    }
  }

  // Lipschitz estimate of the live transition rates from nearby pairs.
  Stream rng(kGridSeed, 1);
  for (int r = 0; r < 4 * random_pairs; ++r) {
    const SimplexPoint x = random_simplex_point(d, rng);
    const SimplexPoint y = SimplexPoint::mix(x, random_simplex_point(d, rng), 1e-3);
    const double dist = (x.coords() - y.coords()).norm();
    if (dist <= 0.0) continue;
    for (std::size_t t : live) {
      const auto& rate = spec.transitions()[t].rate;
      rep.lipschitz = std::max(rep.lipschitz, std::abs(rate.eval(x.span()) - rate.eval(y.span())) / dist);
    }
  }
  const double lip = 1.05 * rep.lipschitz;

  rep.c_bar_lower = std::numeric_limits<double>::infinity();
  std::vector<bool> flagged(table.size(), false);
  for (int r = 0; r < random_pairs; ++r) {
    const SimplexPoint x = (r < static_cast<int>(grid.size())) ? grid[static_cast<std::size_t>(r)]
                                                                : random_simplex_point(d, rng);
    const SimplexPoint y = random_simplex_point(d, rng, 1e-3);
    const Vec lx = table.limit_rates(x.coords());
    const Vec ly = table.limit_rates(y.coords());
    const double cbar = rep.c0 > 0.0 ? 1.0 + lip / rep.c0 * (x.coords() - y.coords()).norm()
                                     : std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < table.size(); ++v) {
      const double ratio = lx[static_cast<Eigen::Index>(v)] / ly[static_cast<Eigen::Index>(v)];
      double up = cbar;
      for (int i = 0; i < d; ++i)
        if (y[i] < x[i]) up *= std::pow(x[i] / y[i], K);
      if (ratio > up * (1.0 + 1e-9) && !flagged[v]) {
        flagged[v] = true;
        std::ostringstream os;
        os << "ratio " << ratio << " exceeds " << up;
        note("ratio-upper", format_direction(table.direction(v)), os.str(), x.coords());
      }
      const auto ns = table.negative_support(v);
      double low = 1.0;
      for (std::size_t q = 0; q < ns.states.size(); ++q)
        low *= std::pow(x[ns.states[q]] / y[ns.states[q]], ns.multiplicity[q]);
      if (low > 0.0) rep.c_bar_lower = std::min(rep.c_bar_lower, ratio / low);
    }
  }
  if (!(rep.c_bar_lower > 1e-12))
    note("ratio-lower", "all", "no positive constant bounds the rate ratio below", Vec());
  return rep;
}

}  // namespace mfldp
