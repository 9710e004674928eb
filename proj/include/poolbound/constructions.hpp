#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poolbound/geometry.hpp"

namespace poolbound {

// s points on the cube diagonal, j/(s-1) in every coordinate, zero first.
struct BaseGrid {
  int d = 0;
  int n = 0;
  int k = 0;
  int s = 0;
  std::vector<double> levels;  // s scalar levels, levels[0] = 0

  // Concatenated coordinates (k*d) of the k-tuple of grid points given by
  // 0-based level indices.
  std::vector<double> tuple_coords(std::span<const int> level_idx) const;
};

BaseGrid build_grid(int d, int n, int k);

// All k-tuples over the grid with at least one zero slot, lexicographic in
// the level indices.
struct AxisSet {
  int k = 0;
  int s = 0;
  std::vector<std::vector<int>> tuples;
};

AxisSet build_axis_set(const BaseGrid& grid);

// Injective labels chi(r): the r-th element of the full tuple set G^k in
// lexicographic order, r in 1..d(n-k)+1.
struct LabelInjection {
  int domain = 0;  // d(n-k)+1
  int k = 0;
  int s = 0;
  std::vector<std::vector<int>> tuples;  // tuples[r-1] = chi(r), level indices
};

LabelInjection build_injection(const BaseGrid& grid);

// Frozen sampled obstruction: per covering region r, directions u with
// assign_region(u) = r; E+ collects (chi(r), delta(u)), E- collects
// (chi(r), delta(-u)).
struct ObstructionInstance {
  int d = 0;
  int n = 0;
  int k = 0;
  double epsilon = 0.25;
  int samples_per_region = 0;
  std::uint64_t seed = 0;

  BaseGrid grid;
  AxisSet axis;
  LabelInjection chi;
  SimplexCover cover;
  DeltaMap delta;

  std::vector<double> e_plus;     // rows of n*d
  std::vector<double> e_minus;    // rows of n*d
  std::vector<int> sample_region; // region of each row, 1-based
  std::vector<double> directions; // rows of d(n-k), same order

  // Smallest inner product <u, v_region(u)> seen while sampling; implies the
  // two sets are at distance >= 2 * epsilon * margin within a region.
  double min_region_margin = 0.0;

  std::size_t point_dim() const { return static_cast<std::size_t>(n) * d; }
  std::size_t sample_count() const;
  std::span<const double> e_plus_row(std::size_t i) const;
  std::span<const double> e_minus_row(std::size_t i) const;
};

ObstructionInstance sample_obstruction(int d, int n, int k, double epsilon,
                                       int samples_per_region,
                                       std::uint64_t seed);

// Normalized distance-ratio target: dist(x, E-) / (dist(x, E+) + dist(x, E-))
// against the sampled sets. Equals 1 on E+ rows and 0 on E- rows.
double target_g(const ObstructionInstance& inst, std::span<const double> x);

// Min Euclidean distance from x to a flat row-major set of points.
double dist_to_rows(const std::vector<double>& rows, std::size_t dim,
                    std::span<const double> x);

// n disjoint axis-aligned cubes of side 1/(2n) inside the unit cube; cube j
// (1-based) starts at j'/n + 1/(4n) in coordinate 1 (j' = j-1) and at 1/(4n)
// elsewhere.
struct LabeledCubes {
  int d = 0;
  int n = 0;
  double side = 0.0;
  std::vector<double> scales;   // n x d
  std::vector<double> offsets;  // n x d
};

LabeledCubes build_labeled_cubes(int d, int n);

// T_j(t), t in the closed unit cube [0,1]^d, j in 1..n.
std::vector<double> apply_cube_map(const LabeledCubes& cubes, int j,
                                   std::span<const double> t);

}  // namespace poolbound
