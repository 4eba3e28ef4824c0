#include "mfldp/structure.hpp"

#include "structure_detail.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace mfldp {

namespace {

constexpr std::size_t kNoTransition = std::numeric_limits<std::size_t>::max();

// A unit-speed piece of a path before the time change to [0, 1].
struct Piece {
  IVec direction;
  std::size_t transition;
  double duration;
};

CommunicatingPath assemble(const SimplexPoint& x, const std::vector<Piece>& pieces) {
  const double total = std::accumulate(pieces.begin(), pieces.end(), 0.0,
                                       [](double s, const Piece& p) { return s + std::max(p.duration, 0.0); });
  std::vector<double> times{0.0};
  std::vector<SimplexPoint> knots{x};
  CommunicatingPath out{PiecewiseLinearPath({0.0}, {x}), {}, {}, {}, 0.0, 0.0, std::nullopt};
  if (!(total > 0.0)) return out;
  Vec z = x.coords();
  double clock = 0.0;
  for (const auto& p : pieces) {
    if (!(p.duration > 1e-14 * total)) continue;
    z += p.duration * p.direction.cast<double>();
    clock += p.duration;
    times.push_back(clock / total);
    knots.emplace_back(z);
    out.directions.push_back(p.direction);
    out.transitions.push_back(p.transition);
    out.speeds.push_back(total);
    out.length += p.duration * p.direction.cast<double>().norm();
  }
  if (out.directions.empty()) return out;
  times.back() = 1.0;
  out.path = PiecewiseLinearPath(std::move(times), std::move(knots));
  return out;
}

IVec unit_move(int d, int from, int to) {
  IVec v = IVec::Zero(d);
  v[from] -= 1;
  v[to] += 1;
  return v;
}

// Edges of the graph of uniformly positive single-particle transitions.
struct SingleJumpGraph {
  std::vector<std::vector<std::pair<int, std::size_t>>> out;
  double c0 = std::numeric_limits<double>::infinity();
};

SingleJumpGraph single_jump_graph(const ModelSpec& spec) {
  if (!check_single_ergodic(spec, Generator::Single).ergodic)
    throw DomainError("single-jump paths need an ergodic single-transition generator");
  const auto classes = classify_transitions(spec);
  SingleJumpGraph g;
  g.out.resize(static_cast<std::size_t>(spec.d()));
  const auto& trs = spec.transitions();
  for (std::size_t t = 0; t < trs.size(); ++t) {
    if (trs[t].k() != 1 || classes[t].cls != RateClass::Positive || trs[t].from[0] == trs[t].to[0]) continue;
    g.out[static_cast<std::size_t>(trs[t].from[0])].emplace_back(trs[t].to[0], t);
    g.c0 = std::min(g.c0, classes[t].min);
  }
  return g;
}

struct Hop {
  int from;
  int to;
  std::size_t transition;
};

// Shortest route from j through already matched states to the first state that
// is neither matched nor j.
std::vector<Hop> route_out(const SingleJumpGraph& g, int j, const std::vector<char>& matched) {
  const auto d = g.out.size();
  std::vector<int> parent(d, -1);
  std::vector<std::size_t> via(d, kNoTransition);
  std::vector<char> seen(d, 0);
  std::deque<int> queue{j};
  seen[static_cast<std::size_t>(j)] = 1;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (const auto& [t, tr] : g.out[static_cast<std::size_t>(s)]) {
      const auto ut = static_cast<std::size_t>(t);
      if (seen[ut]) continue;
      seen[ut] = 1;
      parent[ut] = s;
      via[ut] = tr;
      if (!matched[ut]) {
        std::vector<Hop> hops;
        for (int c = t; c != j; c = parent[static_cast<std::size_t>(c)])
          hops.push_back({parent[static_cast<std::size_t>(c)], c, via[static_cast<std::size_t>(c)]});
        std::reverse(hops.begin(), hops.end());
        return hops;
      }
      queue.push_back(t);
    }
  }
  throw DomainError("no positive single-particle route leaves the matched states");
}

// Coordinate-matching schedule shared by the continuous and lattice versions:
// each entry moves `amount` along the route, one hop after another.
template <class Amount>
std::vector<std::pair<std::vector<Hop>, Amount>> matching_schedule(const SingleJumpGraph& g, std::vector<Amount> z,
                                                                    const std::vector<Amount>& y, Amount tol) {
  const auto d = z.size();
  std::vector<char> matched(d, 0);
  std::vector<std::pair<std::vector<Hop>, Amount>> plan;
  for (std::size_t iter = 0; iter < d; ++iter) {
    int j = -1;
    for (std::size_t i = 0; i < d; ++i)
      if (!matched[i] && z[i] - y[i] > tol) {
        j = static_cast<int>(i);
        break;
      }
    if (j < 0) break;
    const auto uj = static_cast<std::size_t>(j);
    auto hops = route_out(g, j, matched);
    const Amount delta = z[uj] - y[uj];
    z[uj] -= delta;
    z[static_cast<std::size_t>(hops.back().to)] += delta;
    matched[uj] = 1;
    plan.emplace_back(std::move(hops), delta);
  }
  return plan;
}

}  // namespace

double distance_to_inner_simplex(const SimplexPoint& x, double a) {
  const int d = x.dim();
  if (!(a >= 0.0) || a * d > 1.0 + 1e-12) throw DomainError("inner simplex level must lie in [0, 1/d]");
  if (x.min_coord() >= a) return 0.0;
  const double room = 1.0 - d * a;
  if (room <= 0.0) return (x.coords() - Vec::Constant(d, 1.0 / d)).norm();
  const Vec p = (x.coords() - Vec::Constant(d, a)) / room;
  const Vec z = Vec::Constant(d, a) + room * project_to_simplex(p);
  return (x.coords() - z).norm();
}

CommunicatingPath build_path_single_jump(const ModelSpec& spec, const SimplexPoint& x, const SimplexPoint& y) {
  const int d = spec.d();
  if (x.dim() != d || y.dim() != d) throw DomainError("build_path_single_jump: dimension mismatch");
  const auto g = single_jump_graph(spec);
  std::vector<double> z(x.span().begin(), x.span().end());
  std::vector<double> target(y.span().begin(), y.span().end());
  std::vector<Piece> pieces;
  for (const auto& [hops, delta] : matching_schedule(g, z, target, 1e-15))
    for (const auto& h : hops) pieces.push_back({unit_move(d, h.from, h.to), h.transition, delta});
  auto out = assemble(x, pieces);
  const double dist = (x.coords() - y.coords()).norm();
  out.length_constant = dist > 0.0 ? out.length / dist : 0.0;
  out.strong = StrongCertificate{g.c0, d};
  return out;
}

std::vector<LatticePoint> build_discrete_path_single_jump(const ModelSpec& spec, const LatticePoint& x,
                                                          const LatticePoint& y) {
  const int d = spec.d();
  if (x.dim() != d || y.dim() != d || x.n() != y.n())
    throw DomainError("build_discrete_path_single_jump: lattice points do not match");
  const auto g = single_jump_graph(spec);
  std::vector<LatticePoint> out{x};
  auto counts = x.counts();
  for (const auto& [hops, delta] : matching_schedule(g, x.counts(), y.counts(), 0))
    for (int q = 0; q < delta; ++q)
      for (const auto& h : hops) {
        --counts[static_cast<std::size_t>(h.from)];
        ++counts[static_cast<std::size_t>(h.to)];
        out.emplace_back(counts, x.n());
      }
  return out;
}

CommunicatingPath build_boundary_escape(const ModelSpec& spec, const SimplexPoint& x, double a) {
  const int d = spec.d();
  const int K = spec.K();
  if (x.dim() != d) throw DomainError("build_boundary_escape: dimension mismatch");
  const double a_max = 1.0 / (std::pow(K + 1.0, d - 1) * d);
  if (!(a > 0.0) || a > a_max * (1.0 + 1e-12))
    throw DomainError("build_boundary_escape: level must lie in (0, " + std::to_string(a_max) + "]");
  const auto erg = is_k_ergodic(spec);
  if (!erg.ergodic) throw DomainError("build_boundary_escape: model is not K-ergodic");
  const auto pos = positive_transitions(spec);
  const auto& trs = spec.transitions();
  // Schedule constants of the escape along a chain whose first m0 - 1 links are used.
  auto c = [&](int m, int m0) {
    const double top = std::pow(K + 1.0, m0 - 2);
    return m < m0 ? top - std::pow(K + 1.0, m0 - 1 - m) : top;
  };
  const double low = a * (1.0 - 1e-12);
  Vec z = x.coords();
  std::vector<Piece> pieces;
  for (int iter = 0; iter <= d; ++iter) {
    if (z.minCoeff() >= low) break;
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return z[i] > z[j]; });
    const auto chain = detail::find_chain(spec, pos, order.front(), order.back());
    if (!chain) throw DomainError("build_boundary_escape: no accessibility chain");
    // First chain state below the level; states before it are all at or above a.
    std::size_t first_low = 0;
    while (z[(*chain)[first_low].to] >= low) ++first_low;
    const int m0 = static_cast<int>(first_low) + 2;
    const double h = a - z[(*chain)[first_low].to];
    for (int m = 1; m < m0; ++m) {
      const auto& link = (*chain)[static_cast<std::size_t>(m - 1)];
      const IVec v = trs[link.transition].direction(d);
      const double dur = (c(m + 1, m0) - c(m, m0)) * h;
      pieces.push_back({v, link.transition, dur});
      z += dur * v.cast<double>();
    }
  }
  if (z.minCoeff() < low) throw DomainError("build_boundary_escape: did not reach the inner simplex");
  auto out = assemble(x, pieces);
  const double dist = distance_to_inner_simplex(x, a);
  out.length_constant = dist > 0.0 ? out.length / dist : 0.0;
  return out;
}

CommunicatingPath build_interior_path(const ModelSpec& spec, const SimplexPoint& x, const SimplexPoint& y, double a) {
  const int d = spec.d();
  if (x.dim() != d || y.dim() != d) throw DomainError("build_interior_path: dimension mismatch");
  if (!(a > 0.0) || x.min_coord() < a - 1e-12 || y.min_coord() < a - 1e-12)
    throw DomainError("build_interior_path: endpoints must have every coordinate at least a");
  if (!is_k_ergodic(spec).ergodic) throw DomainError("build_interior_path: model is not K-ergodic");

  std::map<std::pair<int, int>, std::vector<RepresentationTerm>> reps;
  std::vector<Piece> pieces;
  Vec z = x.coords();
  for (int iter = 0; iter < 2 * d; ++iter) {
    const Vec gap = z - y.coords();
    Eigen::Index u = 0;
    Eigen::Index w = 0;
    const double surplus = gap.maxCoeff(&u);
    const double deficit = -gap.minCoeff(&w);
    if (!(surplus > 1e-15)) break;
    const double delta = std::min(surplus, deficit);
    const auto key = std::make_pair(static_cast<int>(u), static_cast<int>(w));
    auto it = reps.find(key);
    if (it == reps.end()) it = reps.emplace(key, represent_direction(spec, key.first, key.second)).first;
    const auto& terms = it->second;
    // Largest distance of the replicated moves from the straight move.
    double reach = 0.0;
    Vec partial = Vec::Zero(d);
    for (const auto& r : terms) {
      partial += r.coefficient * r.direction.cast<double>();
      const double s = std::clamp(0.5 * (partial[w] - partial[u]), 0.0, 1.0);
      Vec off = partial;
      off[w] -= s;
      off[u] += s;
      reach = std::max(reach, off.lpNorm<Eigen::Infinity>());
    }
    const double pieces_needed = std::ceil(delta * reach / (0.5 * a));
    if (pieces_needed > 1e5) throw DomainError("build_interior_path: level too small for the replicated moves");
    const int reps_count = std::max(1, static_cast<int>(pieces_needed));
    for (int p = 0; p < reps_count; ++p)
      for (const auto& r : terms) pieces.push_back({r.direction, r.transition, delta / reps_count * r.coefficient});
    z[u] -= delta;
    z[w] += delta;
  }
  auto out = assemble(x, pieces);
  const double dist = (x.coords() - y.coords()).norm();
  out.length_constant = dist > 0.0 ? out.length / dist : 0.0;
  return out;
}

}  // namespace mfldp
