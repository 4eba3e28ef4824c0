#include "mfldp/bounds.hpp"

#include "mfldp/rate_function.hpp"

#include <cmath>

namespace mfldp {

double birth_chain_bound(std::span<const double> b, double c, double t) {
  if (!(c >= 0.0) || !(t >= 0.0)) throw DomainError("birth_chain_bound: needs c >= 0 and t >= 0");
  const auto N = static_cast<double>(b.size());
  if (b.empty()) return std::exp(-c * t);
  if (t == 0.0) return 0.0;
  double log_value = N * std::log(t) - c * t - std::lgamma(N + 1.0);
  for (double r : b) {
    if (!(r > 0.0)) throw DomainError("birth_chain_bound: rates must be positive");
    log_value += std::log(r);
  }
  return std::exp(log_value);
}

ExcursionConstants excursion_constants(const JumpRateTable& table) {
  ExcursionConstants k;
  k.C1 = table.max_direction_norm();
  k.R = max_direction_rate(table);
  k.C2 = k.R * static_cast<double>(table.size()) * k.C1;
  return k;
}

double excursion_time_limit(const JumpRateTable& table, double delta) {
  const auto k = excursion_constants(table);
  return delta / (2.0 * std::sqrt(static_cast<double>(table.d())) * k.C2);
}

double excursion_bound(const JumpRateTable& table, int n, double delta, double tau) {
  if (!(delta > 0.0) || !(tau > 0.0) || n < 1) throw DomainError("excursion_bound: needs n >= 1, delta > 0, tau > 0");
  const auto k = excursion_constants(table);
  if (!(k.C2 > 0.0)) throw DomainError("excursion_bound: model has no positive rates");
  const double limit = excursion_time_limit(table, delta);
  if (tau > limit * (1.0 + 1e-12)) throw DomainError("excursion_bound: tau exceeds delta / (2 sqrt(d) C2)");
  const double d = table.d();
  const double rho = delta / (2.0 * std::sqrt(d) * tau);
  const double lbar = rho * (std::log(rho / k.C2) - 1.0) / k.C1;
  return 2.0 * d * std::exp(-tau * n * lbar);
}

}  // namespace mfldp
