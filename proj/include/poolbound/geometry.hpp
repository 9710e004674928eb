#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poolbound/rng.hpp"

namespace poolbound {

// Closed covering of the unit sphere S^{b-1} by best-aligned-vertex regions
// of a regular simplex: B_r = { u : <u, v_r> = max_q <u, v_q> }. Regions are
// 1-based, r in 1..b+1.
struct SimplexCover {
  int b = 0;
  std::vector<double> vertices;  // (b+1) x b, row-major

  std::span<const double> vertex(int r) const;  // r in 1..b+1
};

// Vertices of a centered regular simplex, unit norm, pairwise inner product
// -1/b. Built by projecting e_r - centroid in R^{b+1} onto an orthonormal
// basis of the sum-zero hyperplane; orientation canonicalized so the first
// nonzero coordinate of vertex 1 is positive.
SimplexCover regular_simplex(int b);

// Validates the simplex invariants (unit norms to 1e-12, Gram to 1e-10,
// vertex sum to 1e-10) and throws on violation.
SimplexCover simplex_cover_from_vertices(int b, std::vector<double> vertices);

struct SphereDirection {
  int b = 0;
  std::vector<double> coords;
};

// Validates unit norm to 1e-12.
SphereDirection make_direction(int b, std::vector<double> coords);
SphereDirection normalize_direction(int b, std::vector<double> coords);
SphereDirection negate(const SphereDirection& u);

// Best-aligned vertex, ties broken to the lowest index. Returns r in 1..b+1.
int assign_region(const SimplexCover& cover, const SphereDirection& u);

// True iff some region contains both u and -u under exact set membership
// (inner product attains the maximum).
bool antipodal_free_violation(const SimplexCover& cover,
                              const SphereDirection& u);

// Tail embedding delta(u) = c + epsilon * u with c = (1/2, ..., 1/2); maps
// S^{d(n-k)-1} into the open cube.
struct DeltaMap {
  int d = 0;
  int n = 0;
  int k = 0;
  double epsilon = 0.25;

  int tail_dim() const { return d * (n - k); }
};

DeltaMap make_delta_map(int d, int n, int k, double epsilon);
std::vector<double> delta_embed(const DeltaMap& map, const SphereDirection& u,
                                int sign);

// Seeded uniform directions (normalized Gaussians).
std::vector<SphereDirection> sample_sphere(int b, int count,
                                           std::uint64_t seed);
SphereDirection sample_one_direction(int b, Rng& rng);

}  // namespace poolbound
