#include "mfldp/rate_function.hpp"

#include "mfldp/grid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace mfldp {

double poisson_ell(double r) {
  if (r < 0.0) return kInf;
  if (r == 0.0) return 1.0;
  return r * std::log(r) - r + 1.0;
}

namespace {

Vec exponents(const JumpRateTable& table, const Vec& theta) {
  return table.direction_matrix().transpose() * theta;
}

}  // namespace

double hamiltonian(const JumpRateTable& table, const SimplexPoint& x, const Vec& theta) {
  const Vec lam = table.limit_rates(x.coords());
  const Vec a = exponents(table, theta);
  double h = 0.0;
  for (Eigen::Index v = 0; v < lam.size(); ++v)
    if (lam[v] != 0.0) h += lam[v] * std::expm1(std::min(a[v], kExponentCap));
  return h;
}

HamiltonianValue hamiltonian_derivatives(const JumpRateTable& table, const SimplexPoint& x, const Vec& theta) {
  const Vec lam = table.limit_rates(x.coords());
  const Vec a = exponents(table, theta);
  const Mat& V = table.direction_matrix();
  const int d = table.d();
  HamiltonianValue out{0.0, Vec::Zero(d), Mat::Zero(d, d)};
  for (Eigen::Index v = 0; v < lam.size(); ++v) {
    if (lam[v] == 0.0) continue;
    const double e = std::min(a[v], kExponentCap);
    out.value += lam[v] * std::expm1(e);
    const double w = lam[v] * std::exp(e);
    out.gradient += w * V.col(v);
    out.hessian += w * V.col(v) * V.col(v).transpose();
  }
  return out;
}

namespace {

// Directions with positive rate and an orthonormal basis of their span.
struct ActiveSet {
  std::vector<Eigen::Index> index;
  Mat A;      // d x m active directions
  Vec lam;    // m active rates
  Mat basis;  // d x r orthonormal basis of span(A)
  Mat B;      // r x m coordinates of the directions in the basis
};

ActiveSet active_set(const JumpRateTable& table, const Vec& rates) {
  ActiveSet s;
  for (Eigen::Index v = 0; v < rates.size(); ++v)
    if (rates[v] > 0.0) s.index.push_back(v);
  const auto m = static_cast<Eigen::Index>(s.index.size());
  const int d = table.d();
  s.A.resize(d, m);
  s.lam.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    s.A.col(k) = table.direction_matrix().col(s.index[static_cast<std::size_t>(k)]);
    s.lam[k] = rates[s.index[static_cast<std::size_t>(k)]];
  }
  if (m == 0) {
    s.basis.resize(d, 0);
  } else {
    const Eigen::JacobiSVD<Mat> svd(s.A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv[r] > 1e-10 * sv[0]) ++r;
    s.basis = svd.matrixU().leftCols(r);
  }
  s.B = s.basis.transpose() * s.A;
  return s;
}

void check_beta(const JumpRateTable& table, const Vec& beta) {
  if (beta.size() != table.d()) throw DomainError("velocity has the wrong dimension");
  if (!beta.allFinite()) throw DomainError("velocity must be finite");
  if (std::abs(beta.sum()) > 1e-10 * std::max(1.0, beta.lpNorm<Eigen::Infinity>()))
    throw DomainError("velocity components must sum to zero");
}

LocalRateResult infinite(const Vec& ascent, int d, Eigen::Index dirs) {
  LocalRateResult r;
  r.value = kInf;
  r.status = SolveStatus::Infinite;
  r.theta = Vec::Zero(d);
  r.q = Vec::Zero(dirs);
  r.ascent = ascent.normalized();
  return r;
}

// Shared prelude: returns a finished result when beta leaves the span of the
// active directions (or there are none).
std::optional<LocalRateResult> trivial_cases(const ActiveSet& s, const Vec& beta, int d, Eigen::Index dirs) {
  const Vec outside = beta - s.basis * (s.basis.transpose() * beta);
  if (outside.norm() > 1e-10 * (1.0 + beta.norm())) return infinite(outside, d, dirs);
  if (s.index.empty()) {
    LocalRateResult r;
    r.theta = Vec::Zero(d);
    r.q = Vec::Zero(dirs);
    return r;
  }
  return std::nullopt;
}

}  // namespace

LocalRateResult local_rate(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta,
                           const LocalRateOptions& opts, const Vec* warm_start) {
  return local_rate(table, table.limit_rates(x.coords()), beta, opts, warm_start);
}

LocalRateResult local_rate(const JumpRateTable& table, const Vec& rates, const Vec& beta,
                           const LocalRateOptions& opts, const Vec* warm_start) {
  check_beta(table, beta);
  const int d = table.d();
  const auto dirs = static_cast<Eigen::Index>(table.size());
  const ActiveSet s = active_set(table, rates);
  if (auto r = trivial_cases(s, beta, d, dirs)) return *r;

  const Vec b = s.basis.transpose() * beta;
  bool capped = false;
  auto objective = [&](const Vec& z, Vec* w) {
    const Vec a = s.B.transpose() * z;
    double f = b.dot(z);
    if (w) w->resize(a.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      if (a[k] > kExponentCap) capped = true;
      const double e = std::min(a[k], kExponentCap);
      f -= s.lam[k] * std::expm1(e);
      if (w) (*w)[k] = s.lam[k] * std::exp(e);
    }
    return f;
  };

  Vec z = Vec::Zero(b.size());
  if (warm_start && warm_start->size() == d) {
    const Vec z0 = s.basis.transpose() * *warm_start;
    if (objective(z0, nullptr) > 0.0) z = z0;
    capped = false;
  }
  const double tol = opts.tolerance * std::max(1.0, beta.norm());
  LocalRateResult res;
  Vec w;
  double f = objective(z, &w);
  Vec g = b - s.B * w;
  int it = 0;
  for (; it < opts.max_iterations && g.norm() > tol; ++it) {
    const Mat H = s.B * w.asDiagonal() * s.B.transpose();
    Eigen::LLT<Mat> llt(H);
    Vec p = llt.info() == Eigen::Success ? Vec(llt.solve(g)) : g;
    if (!(p.dot(g) > 0.0)) p = g;
    // Armijo on the objective; once objective changes drop below roundoff,
    // a decrease of the gradient norm is accepted instead.
    auto acceptable = [&](double tt, double fn, const Vec& wn) {
      if (fn >= f + 1e-4 * tt * p.dot(g)) return true;
      return std::abs(fn - f) <= 1e-12 * (1.0 + std::abs(f)) && (b - s.B * wn).norm() < g.norm();
    };
    double t = 1.0;
    Vec wn;
    double fn = objective(z + p, &wn);
    for (int h = 0; h < 60 && !acceptable(t, fn, wn); ++h) {
      t *= 0.5;
      fn = objective(z + t * p, &wn);
    }
    if (!acceptable(t, fn, wn)) break;
    z += t * p;
    f = fn;
    w = std::move(wn);
    g = b - s.B * w;
    if (capped || z.norm() > opts.divergence_norm) {
      LocalRateResult inf = infinite(s.basis * z, d, dirs);
      inf.iterations = it + 1;
      return inf;
    }
  }
  res.iterations = it;
  res.gradient_norm = g.norm();
  res.status = g.norm() <= tol ? SolveStatus::Converged : SolveStatus::NotConverged;
  res.value = std::max(f, 0.0);
  res.theta = s.basis * z;
  res.q = Vec::Zero(dirs);
  for (std::size_t k = 0; k < s.index.size(); ++k) res.q[s.index[k]] = w[static_cast<Eigen::Index>(k)];
  return res;
}

Vec nonneg_least_squares(const Mat& A, const Vec& b) {
  const auto n = A.cols();
  Vec x = Vec::Zero(n);
  if (n == 0) return x;
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  const double tol = 1e-13 * (1.0 + b.norm()) * std::max(1.0, A.colwise().norm().maxCoeff());
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Mat Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const Vec sp = Ap.completeOrthogonalDecomposition().solve(b);
    Vec s = Vec::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[static_cast<Eigen::Index>(k)];
    return s;
  };
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Vec grad = A.transpose() * (b - A * x);
    Eigen::Index j = -1;
    double best = tol;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!passive[static_cast<std::size_t>(k)] && grad[k] > best) {
        best = grad[k];
        j = k;
      }
    if (j < 0) break;
    passive[static_cast<std::size_t>(j)] = 1;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      const Vec s = solve_passive();
      bool positive = true;
      for (Eigen::Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && s[k] <= 0.0) positive = false;
      if (positive) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && s[k] <= 0.0) alpha = std::min(alpha, x[k] / (x[k] - s[k]));
      x += alpha * (s - x);
      for (Eigen::Index k = 0; k < n; ++k)
        if (passive[static_cast<std::size_t>(k)] && x[k] <= 1e-15) {
          passive[static_cast<std::size_t>(k)] = 0;
          x[k] = 0.0;
        }
    }
  }
  return x;
}

LocalRateResult local_rate_primal(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta,
                                  const LocalRateOptions& opts) {
  check_beta(table, beta);
  const int d = table.d();
  const auto dirs = static_cast<Eigen::Index>(table.size());
  const ActiveSet s = active_set(table, table.limit_rates(x.coords()));
  if (auto r = trivial_cases(s, beta, d, dirs)) return *r;

  // Feasibility: beta must be a nonnegative combination of the active directions.
  const Vec q_cone = nonneg_least_squares(s.A, beta);
  const Vec miss = beta - s.A * q_cone;
  if (miss.norm() > 1e-9 * (1.0 + beta.norm())) return infinite(miss, d, dirs);

  // Newton on the optimality system log(q/lambda) + B^T nu = 0, B q = b.
  const Vec b = s.basis.transpose() * beta;
  const auto m = s.lam.size();
  Vec q = 0.5 * (s.lam + q_cone);
  Vec nu = Vec::Zero(b.size());
  auto residual = [&](const Vec& qq, const Vec& nn) {
    Vec r(m + b.size());
    r.head(m) = (qq.array() / s.lam.array()).log().matrix() + s.B.transpose() * nn;
    r.tail(b.size()) = s.B * qq - b;
    return r;
  };
  const double tol = opts.tolerance * std::max(1.0, beta.norm());
  Vec r = residual(q, nu);
  int it = 0;
  for (; it < 4 * opts.max_iterations && r.norm() > tol; ++it) {
    const Vec grad = (q.array() / s.lam.array()).log().matrix();
    const Vec primal = s.B * q - b;
    const Mat S = s.B * q.asDiagonal() * s.B.transpose();
    const Vec nu_new = S.ldlt().solve(primal - s.B * (q.cwiseProduct(grad)));
    const Vec dq = -q.cwiseProduct(grad + s.B.transpose() * nu_new);
    const Vec dnu = nu_new - nu;
    double t = 1.0;
    for (Eigen::Index k = 0; k < m; ++k)
      if (dq[k] < 0.0) t = std::min(t, 0.99 * q[k] / -dq[k]);
    Vec rn = residual(q + t * dq, nu + t * dnu);
    for (int h = 0; h < 60 && !(rn.norm() <= (1.0 - 0.01 * t) * r.norm()); ++h) {
      t *= 0.5;
      rn = residual(q + t * dq, nu + t * dnu);
    }
    if (!(rn.norm() < r.norm())) break;
    q += t * dq;
    nu += t * dnu;
    r = rn;
  }
  LocalRateResult res;
  res.iterations = it;
  res.gradient_norm = r.norm();
  res.status = r.norm() <= tol ? SolveStatus::Converged : SolveStatus::NotConverged;
  double value = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) value += s.lam[k] * poisson_ell(q[k] / s.lam[k]);
  res.value = value;
  res.theta = -(s.basis * nu);
  res.q = Vec::Zero(dirs);
  for (std::size_t k = 0; k < s.index.size(); ++k) res.q[s.index[k]] = q[static_cast<Eigen::Index>(k)];
  return res;
}

double max_direction_rate(const JumpRateTable& table) {
  double R = 0.0;
  for (const auto& x : validation_grid(table.d())) {
    const Vec lam = table.limit_rates(x.coords());
    if (lam.size() > 0) R = std::max(R, lam.maxCoeff());
  }
  return R;
}

SuperlinearityCheck superlinearity_bound_check(const JumpRateTable& table, const SimplexPoint& x, const Vec& beta) {
  const double nb = beta.norm();
  if (!(nb > std::exp(1.0))) throw DomainError("superlinearity check needs |beta| > e");
  SuperlinearityCheck c;
  c.R = max_direction_rate(table);
  c.value = local_rate(table, x, beta).value;
  c.bound = nb * std::log(nb) / table.max_direction_norm() - c.R * static_cast<double>(table.size()) * nb;
  c.holds = c.value >= c.bound - 1e-9 * std::abs(c.bound);
  return c;
}

double sanov_cost(const SimplexPoint& mu0, const SimplexPoint& nu) {
  if (mu0.dim() != nu.dim()) throw DomainError("sanov_cost: dimension mismatch");
  double r = 0.0;
  for (int i = 0; i < mu0.dim(); ++i) {
    if (mu0[i] == 0.0) continue;
    if (nu[i] == 0.0) return kInf;
    r += mu0[i] * std::log(mu0[i] / nu[i]);
  }
  return std::max(r, 0.0);
}

}  // namespace mfldp
