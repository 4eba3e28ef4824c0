#include "mfldp/grid.hpp"

#include <bit>

namespace mfldp {

SimplexPoint random_simplex_point(int d, Stream& rng, double min_coord) {
  Vec e(d);
  for (int i = 0; i < d; ++i) e[i] = rng.exponential(1.0);
  e /= e.sum();
  if (min_coord > 0.0) e = (Vec::Constant(d, min_coord) + (1.0 - d * min_coord) * e).eval();
  return SimplexPoint(std::move(e));
}

std::vector<SimplexPoint> validation_grid(int d, int random_points, std::uint64_t seed) {
  std::vector<SimplexPoint> grid;
  grid.push_back(SimplexPoint::barycenter(d));
  auto face = [&](unsigned mask) {
    Vec c = Vec::Zero(d);
    const double w = 1.0 / std::popcount(mask);
    for (int i = 0; i < d; ++i)
      if (mask & (1u << i)) c[i] = w;
    grid.emplace_back(std::move(c));
  };
  if (d <= 14) {
    const unsigned full = (1u << d) - 1;
    for (int size = d - 1; size >= 2; --size)
      for (unsigned mask = 1; mask < full; ++mask)
        if (std::popcount(mask) == size) face(mask);
  } else {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) face((1u << i) | (1u << j));
  }
  for (int i = 0; i < d; ++i) grid.push_back(SimplexPoint::vertex(d, i));
  Stream rng(seed, 0);
  for (int r = 0; r < random_points; ++r) grid.push_back(random_simplex_point(d, rng));
  return grid;
}

}  // namespace mfldp
