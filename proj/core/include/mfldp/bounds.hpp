#pragma once

#include "mfldp/rates.hpp"

#include <span>

namespace mfldp {

// (1/N!) (prod b_i) t^N e^{-ct}: lower bound on reaching the end of a birth
// chain with forward rates b_1..b_N and total exit rates at most c.
double birth_chain_bound(std::span<const double> b, double c, double t);

struct ExcursionConstants {
  double C1 = 0.0;  // max |v|
  double R = 0.0;   // grid maximum of the direction rates
  double C2 = 0.0;  // R |V| C1
};

ExcursionConstants excursion_constants(const JumpRateTable& table);

// Largest tau allowed by the excursion bound at level delta: delta / (2 sqrt(d) C2).
double excursion_time_limit(const JumpRateTable& table, double delta);

// 2d exp(-tau n lbar(delta / (2 sqrt(d) tau))) with lbar(r) = r (log(r / C2) - 1) / C1,
// bounding P(sup_{t <= tau} |x(t) - x(0)| >= delta).
double excursion_bound(const JumpRateTable& table, int n, double delta, double tau);

}  // namespace mfldp
