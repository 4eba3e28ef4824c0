#pragma once

#include "mfldp/rng.hpp"
#include "mfldp/simplex.hpp"

#include <cstdint>
#include <vector>

namespace mfldp {

inline constexpr std::uint64_t kGridSeed = 0x5eed'2024ULL;
inline constexpr int kGridRandomPoints = 200;

// Barycenter, barycenters of every proper face in decreasing face dimension
// (edge midpoints included), the d vertices, then seeded uniform random points.
// For d > 14 only edge midpoints stand in for the proper faces.
std::vector<SimplexPoint> validation_grid(int d, int random_points = kGridRandomPoints,
                                          std::uint64_t seed = kGridSeed);

// Uniformly distributed point on the simplex, optionally bounded away from the boundary.
SimplexPoint random_simplex_point(int d, Stream& rng, double min_coord = 0.0);

}  // namespace mfldp
