#include "mfldp/structure.hpp"

#include "mfldp/grid.hpp"
#include "structure_detail.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace mfldp {

std::vector<TransitionClass> classify_transitions(const ModelSpec& spec) {
  const auto grid = validation_grid(spec.d());
  std::vector<TransitionClass> out;
  out.reserve(spec.transitions().size());
  for (const auto& tr : spec.transitions()) {
    TransitionClass c;
    c.min = std::numeric_limits<double>::infinity();
    c.max = -std::numeric_limits<double>::infinity();
    bool zero = true;
    for (const auto& x : grid) {
      const double r = tr.rate.eval(x.span());
      if (!(std::abs(r) < kZeroRateTol)) zero = false;
      if (!(r >= c.min)) {
        c.min = r;
        c.argmin = x.coords();
      }
      c.max = std::max(c.max, r);
    }
    if (zero)
      c.cls = RateClass::Zero;
    else if (c.min > kPositiveRateTol)
      c.cls = RateClass::Positive;
    else
      c.cls = RateClass::Mixed;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<bool> positive_transitions(const ModelSpec& spec) {
  const auto classes = classify_transitions(spec);
  std::vector<bool> pos(classes.size());
  for (std::size_t t = 0; t < classes.size(); ++t) pos[t] = classes[t].cls == RateClass::Positive;
  return pos;
}

std::vector<int> AccessibilityClosure::states() const {
  std::vector<int> s{source};
  for (const auto& st : steps) s.push_back(st.state);
  return s;
}

bool AccessibilityClosure::contains(int s) const {
  return s == source || std::any_of(steps.begin(), steps.end(), [&](const ClosureStep& st) { return st.state == s; });
}

namespace {

bool sources_inside(const TupleTransition& tr, const std::vector<char>& in) {
  return std::all_of(tr.from.begin(), tr.from.end(), [&](int s) { return in[static_cast<std::size_t>(s)] != 0; });
}

AccessibilityClosure closure_with(const ModelSpec& spec, const std::vector<bool>& positive, int u) {
  const auto& trs = spec.transitions();
  std::vector<char> in(static_cast<std::size_t>(spec.d()), 0);
  in[static_cast<std::size_t>(u)] = 1;
  AccessibilityClosure c;
  c.source = u;
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t t = 0; t < trs.size(); ++t) {
      if (!positive[t] || !sources_inside(trs[t], in)) continue;
      for (int j : trs[t].to) {
        if (in[static_cast<std::size_t>(j)]) continue;
        in[static_cast<std::size_t>(j)] = 1;
        c.steps.push_back({j, t});
        grew = true;
      }
    }
  }
  return c;
}

void check_state(const ModelSpec& spec, int u, const char* what) {
  if (u < 0 || u >= spec.d())
    throw DomainError(std::string(what) + ": state " + std::to_string(u) + " out of range");
}

bool strongly_connected(const Mat& g) {
  const auto d = g.rows();
  auto reach = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j == i || seen[static_cast<std::size_t>(j)]) continue;
        const double w = forward ? g(i, j) : g(j, i);
        if (w > kZeroRateTol) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == d;
  };
  return reach(true) && reach(false);
}

}  // namespace

AccessibilityClosure accessibility_closure(const ModelSpec& spec, int u) {
  check_state(spec, u, "accessibility_closure");
  return closure_with(spec, positive_transitions(spec), u);
}

KErgodicity is_k_ergodic(const ModelSpec& spec) {
  const auto pos = positive_transitions(spec);
  KErgodicity r;
  r.ergodic = true;
  for (int u = 0; u < spec.d(); ++u) {
    r.closures.push_back(closure_with(spec, pos, u));
    if (r.closures.back().size() != static_cast<std::size_t>(spec.d())) r.ergodic = false;
  }
  return r;
}

SingleErgodicity check_single_ergodic(const JumpRateTable& table, Generator which) {
  SingleErgodicity r;
  r.ergodic = true;
  for (const auto& x : validation_grid(table.d())) {
    const Mat g = which == Generator::Single ? table.single_transition_matrix(x.coords())
                                             : table.effective_matrix(x.coords());
    if (!strongly_connected(g)) {
      r.ergodic = false;
      r.counterexample = x.coords();
      break;
    }
  }
  return r;
}

SingleErgodicity check_single_ergodic(const ModelSpec& spec, Generator which) {
  return check_single_ergodic(JumpRateTable(spec), which);
}

UeReport check_ue(const ModelSpec& spec) {
  UeReport r;
  r.classes = classify_transitions(spec);
  r.ok = true;
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    const auto& c = r.classes[t];
    if (c.cls != RateClass::Mixed) continue;
    r.ok = false;
    std::ostringstream msg;
    msg << "rate is neither identically zero nor bounded away from zero (grid min " << c.min << ", max " << c.max
        << ")";
    r.findings.push_back({"ue", spec.transition_label(t), msg.str(), c.argmin});
  }
  return r;
}

SimJumpsReport check_simjumps(const JumpRateTable& table) {
  const auto classes = classify_transitions(table.model());
  const int d = table.d();
  SimJumpsReport r;
  r.ok = true;
  for (std::size_t v = 0; v < table.size(); ++v) {
    const IVec& dir = table.direction(v);
    SimJumpsDiagnosis diag;
    diag.direction = dir;
    const auto& terms = table.terms(v);
    auto exact = [&](const RateTerm& term) {
      for (int i = 0; i < d; ++i) {
        const int want = dir[i] < 0 ? -dir[i] : 0;
        if (term.source_multiplicity[static_cast<std::size_t>(i)] != want) return false;
      }
      return true;
    };
    auto on_support = [&](const RateTerm& term) {
      for (int i = 0; i < d; ++i)
        if (dir[i] >= 0 && term.source_multiplicity[static_cast<std::size_t>(i)] != 0) return false;
      return true;
    };
    diag.property1 = std::any_of(terms.begin(), terms.end(), [&](const RateTerm& term) {
      return classes[term.transition].cls == RateClass::Positive && exact(term);
    });
    diag.property2 = !terms.empty() && on_support(terms.front()) &&
                     std::all_of(terms.begin(), terms.end(), [&](const RateTerm& term) {
                       return term.source_multiplicity == terms.front().source_multiplicity;
                     });
    if (!diag.property1 && !diag.property2) {
      r.ok = false;
      r.findings.push_back({"simjumps", format_direction(dir),
                            "no transition moves exactly the negative part of the direction, and the contributing "
                            "transitions do not share a source profile on it",
                            std::nullopt});
    }
    r.directions.push_back(std::move(diag));
  }
  return r;
}

SimJumpsReport check_simjumps(const ModelSpec& spec) { return check_simjumps(JumpRateTable(spec)); }

Vec solve_nonneg_linear(const Mat& C, const Vec& y, Substochastic by) {
  const auto n = C.rows();
  if (C.cols() != n || y.size() != n) throw DomainError("solve_nonneg_linear: dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y[i] >= 0.0)) throw DomainError("solve_nonneg_linear: right-hand side must be nonnegative");
    if (C(i, i) != 0.0) throw DomainError("solve_nonneg_linear: diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(C(i, j) >= 0.0)) throw DomainError("solve_nonneg_linear: matrix must be nonnegative");
  }
  const Vec sums = by == Substochastic::Rows ? Vec(C.rowwise().sum()) : Vec(C.colwise().sum().transpose());
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(sums[i] < 1.0))
      throw DomainError(std::string("solve_nonneg_linear: ") + (by == Substochastic::Rows ? "row " : "column ") +
                        std::to_string(i + 1) + " sums to " + std::to_string(sums[i]) + ", must be below 1");
  if (n == 0) return Vec(0);
  const Mat A = Mat::Identity(n, n) - C;
  const Eigen::PartialPivLU<Mat> lu(A);
  Vec x = lu.solve(y);
  for (int it = 0; it < 3; ++it) {
    const Vec res = y - A * x;
    if (res.lpNorm<Eigen::Infinity>() <= 1e-15) break;
    x += lu.solve(res);
  }
  // The exact solution is nonnegative; only rounding can make entries negative.
  x = x.cwiseMax(0.0);
  return x;
}

namespace detail {

std::optional<std::vector<ChainLink>> find_chain(const ModelSpec& spec, const std::vector<bool>& positive, int s,
                                                 int w) {
  const int d = spec.d();
  if (d > 64) throw DomainError("accessibility chains are limited to 64 states");
  const auto& trs = spec.transitions();
  struct Node {
    std::uint64_t mask;
    int last;
    std::size_t parent;
    ChainLink link;
  };
  constexpr std::size_t kNodeCap = 2'000'000;
  std::vector<Node> nodes{{std::uint64_t{1} << s, s, 0, {0, s, s}}};
  std::set<std::pair<std::uint64_t, int>> seen{{nodes[0].mask, s}};
  auto unwind = [&](std::size_t idx) {
    std::vector<ChainLink> chain;
    for (; idx != 0; idx = nodes[idx].parent) chain.push_back(nodes[idx].link);
    std::reverse(chain.begin(), chain.end());
    return chain;
  };
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    const auto mask = nodes[head].mask;
    const int last = nodes[head].last;
    for (std::size_t t = 0; t < trs.size(); ++t) {
      if (!positive[t]) continue;
      const auto& tr = trs[t];
      if (std::find(tr.from.begin(), tr.from.end(), last) == tr.from.end()) continue;
      if (!std::all_of(tr.from.begin(), tr.from.end(), [&](int i) { return (mask >> i) & 1U; })) continue;
      for (int j : tr.to) {
        if ((mask >> j) & 1U) continue;
        const auto child = mask | (std::uint64_t{1} << j);
        if (!seen.insert({child, j}).second) continue;
        nodes.push_back({child, j, head, {t, last, j}});
        if (j == w) return unwind(nodes.size() - 1);
        if (nodes.size() > kNodeCap) throw DomainError("accessibility chain search exceeded its node budget");
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

namespace {

// b-weights of a chain: the last link has weight 1 and each earlier link
// carries enough mass to cover every later withdrawal from its target state.
std::vector<double> chain_weights(const ModelSpec& spec, const std::vector<detail::ChainLink>& chain) {
  const auto& trs = spec.transitions();
  const double K = spec.K();
  std::vector<double> b(chain.size(), 0.0);
  b.back() = 1.0;
  double tail = 1.0;
  for (std::size_t m = chain.size() - 1; m-- > 0;) {
    const auto& tr = trs[chain[m].transition];
    const double hits = static_cast<double>(std::count(tr.to.begin(), tr.to.end(), chain[m].to));
    const double kappa = hits / tr.k();
    b[m] = K * tail / kappa;
    tail += b[m];
  }
  return b;
}

}  // namespace

std::vector<RepresentationTerm> represent_direction(const ModelSpec& spec, int u, int w) {
  check_state(spec, u, "represent_direction");
  check_state(spec, w, "represent_direction");
  if (u == w) throw DomainError("represent_direction: source and target states coincide");
  const int d = spec.d();
  const auto pos = positive_transitions(spec);
  for (int s = 0; s < d; ++s)
    if (closure_with(spec, pos, s).size() != static_cast<std::size_t>(d))
      throw DomainError("represent_direction: model is not K-ergodic");
  const auto& trs = spec.transitions();

  auto chain_to_w = [&](int s) {
    auto chain = detail::find_chain(spec, pos, s, w);
    if (!chain)
      throw DomainError("represent_direction: no accessibility chain from state " + std::to_string(s + 1) +
                        " to state " + std::to_string(w + 1));
    return *std::move(chain);
  };

  std::vector<std::pair<std::size_t, double>> raw;
  const auto first = chain_to_w(u);
  const bool single = std::all_of(first.begin(), first.end(),
                                  [&](const detail::ChainLink& l) { return trs[l.transition].k() == 1; });
  if (single) {
    for (const auto& l : first) raw.emplace_back(l.transition, 1.0);
  } else {
    // Index the states other than w.
    std::vector<int> idx(static_cast<std::size_t>(d), -1);
    int n = 0;
    for (int s = 0; s < d; ++s)
      if (s != w) idx[static_cast<std::size_t>(s)] = n++;
    Mat C = Mat::Zero(n, n);
    std::vector<std::vector<detail::ChainLink>> chains(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(d));
    std::vector<double> norm(static_cast<std::size_t>(d), 1.0);
    for (int s = 0; s < d; ++s) {
      if (s == w) continue;
      auto& chain = chains[static_cast<std::size_t>(s)];
      chain = s == u ? first : chain_to_w(s);
      auto& b = weights[static_cast<std::size_t>(s)];
      b = chain_weights(spec, chain);
      Vec sum = Vec::Zero(d);
      for (std::size_t m = 0; m < chain.size(); ++m)
        sum += b[m] * trs[chain[m].transition].direction(d).cast<double>();
      const double total = -sum[s];
      if (!(total > 0.0)) throw DomainError("represent_direction: degenerate chain weights");
      norm[static_cast<std::size_t>(s)] = total;
      for (int i = 0; i < d; ++i) {
        if (i == s || i == w) continue;
        const double c = sum[i] / total;
        if (c < -1e-12) throw DomainError("represent_direction: chain weights produced a negative coefficient");
        C(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(s)]) = std::max(c, 0.0);
      }
    }
    Vec rhs = Vec::Zero(n);
    rhs[idx[static_cast<std::size_t>(u)]] = 1.0;
    const Vec theta = solve_nonneg_linear(C, rhs, Substochastic::Columns);
    for (int s = 0; s < d; ++s) {
      if (s == w) continue;
      const double scale = theta[idx[static_cast<std::size_t>(s)]] / norm[static_cast<std::size_t>(s)];
      const auto& chain = chains[static_cast<std::size_t>(s)];
      for (std::size_t m = 0; m < chain.size(); ++m)
        raw.emplace_back(chain[m].transition, scale * weights[static_cast<std::size_t>(s)][m]);
    }
  }

  // Merge repeated transitions, then cancel opposite directions.
  std::vector<RepresentationTerm> terms;
  for (const auto& [t, a] : raw) {
    auto it = std::find_if(terms.begin(), terms.end(), [&](const RepresentationTerm& r) { return r.transition == t; });
    if (it != terms.end())
      it->coefficient += a;
    else
      terms.push_back({t, trs[t].direction(d), a});
  }
  for (std::size_t p = 0; p < terms.size(); ++p)
    for (std::size_t q = p + 1; q < terms.size(); ++q) {
      if (terms[p].direction != -terms[q].direction) continue;
      const double m = std::min(terms[p].coefficient, terms[q].coefficient);
      terms[p].coefficient -= m;
      terms[q].coefficient -= m;
    }
  double scale = 0.0;
  for (const auto& r : terms) scale = std::max(scale, r.coefficient);
  std::erase_if(terms, [&](const RepresentationTerm& r) { return r.coefficient <= 1e-14 * scale; });
  return terms;
}

}  // namespace mfldp
