#include "poolbound/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "poolbound/bounds.hpp"
#include "poolbound/kernels.hpp"
#include "poolbound/tensor.hpp"

namespace poolbound {

namespace {

// Odometer step over {0..s-1}^k, most significant slot first. Returns false
// after the last tuple.
bool next_tuple(std::vector<int>& idx, int s) {
  for (std::size_t pos = idx.size(); pos-- > 0;) {
    if (++idx[pos] < s) return true;
    idx[pos] = 0;
  }
  return false;
}

}  // namespace

std::vector<double> BaseGrid::tuple_coords(std::span<const int> level_idx) const {
  if (level_idx.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("BaseGrid::tuple_coords: tuple length mismatch");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k) * d);
  for (int m = 0; m < k; ++m) {
    const int j = level_idx[m];
    if (j < 0 || j >= s) {
      throw std::invalid_argument("BaseGrid::tuple_coords: level out of range");
    }
    for (int c = 0; c < d; ++c) out.push_back(levels[j]);
  }
  return out;
}

BaseGrid build_grid(int d, int n, int k) {
  BaseGrid g;
  g.d = d;
  g.n = n;
  g.k = k;
  g.s = grid_side(d, n, k);
  g.levels.resize(g.s);
  if (g.s == 1) {
    g.levels[0] = 0.0;
  } else {
    for (int j = 0; j < g.s; ++j) {
      g.levels[j] = static_cast<double>(j) / static_cast<double>(g.s - 1);
    }
  }
  return g;
}

AxisSet build_axis_set(const BaseGrid& grid) {
  AxisSet axis;
  axis.k = grid.k;
  axis.s = grid.s;
  std::vector<int> idx(grid.k, 0);
  do {
    if (std::find(idx.begin(), idx.end(), 0) != idx.end()) {
      axis.tuples.push_back(idx);
    }
  } while (next_tuple(idx, grid.s));
  const long long expect = axis_cardinality(grid.d, grid.n, grid.k);
  if (static_cast<long long>(axis.tuples.size()) != expect) {
    throw std::logic_error("build_axis_set: cardinality mismatch");
  }
  return axis;
}

LabelInjection build_injection(const BaseGrid& grid) {
  const long long domain =
      static_cast<long long>(grid.d) * (grid.n - grid.k) + 1;
  LabelInjection chi;
  chi.domain = static_cast<int>(domain);
  chi.k = grid.k;
  chi.s = grid.s;
  std::vector<int> idx(grid.k, 0);
  long long taken = 0;
  do {
    chi.tuples.push_back(idx);
    ++taken;
  } while (taken < domain && next_tuple(idx, grid.s));
  if (taken < domain) {
    throw std::logic_error("build_injection: grid too small for domain");
  }
  return chi;
}

std::size_t ObstructionInstance::sample_count() const {
  return sample_region.size();
}

std::span<const double> ObstructionInstance::e_plus_row(std::size_t i) const {
  return std::span<const double>(e_plus.data() + i * point_dim(), point_dim());
}

std::span<const double> ObstructionInstance::e_minus_row(std::size_t i) const {
  return std::span<const double>(e_minus.data() + i * point_dim(), point_dim());
}

ObstructionInstance sample_obstruction(int d, int n, int k, double epsilon,
                                       int samples_per_region,
                                       std::uint64_t seed) {
  if (samples_per_region < 1) {
    throw std::invalid_argument("sample_obstruction: samples_per_region < 1");
  }
  ObstructionInstance inst;
  inst.d = d;
  inst.n = n;
  inst.k = k;
  inst.epsilon = epsilon;
  inst.samples_per_region = samples_per_region;
  inst.seed = seed;
  inst.grid = build_grid(d, n, k);
  inst.axis = build_axis_set(inst.grid);
  inst.chi = build_injection(inst.grid);
  inst.delta = make_delta_map(d, n, k, epsilon);

  const int b = inst.delta.tail_dim();
  inst.cover = regular_simplex(b);

  const std::size_t pd = inst.point_dim();
  const std::size_t rows =
      static_cast<std::size_t>(b + 1) * samples_per_region;
  inst.e_plus.reserve(rows * pd);
  inst.e_minus.reserve(rows * pd);
  inst.sample_region.reserve(rows);
  inst.directions.reserve(rows * b);
  inst.min_region_margin = std::numeric_limits<double>::infinity();

  const long long budget =
      10000LL + 1000LL * static_cast<long long>(samples_per_region);
  for (int r = 1; r <= b + 1; ++r) {
    Rng rng(derive_seed(seed, "obstruction-region", static_cast<std::uint64_t>(r)));
    const std::vector<double> base =
        inst.grid.tuple_coords(inst.chi.tuples[r - 1]);
    int accepted = 0;
    long long attempts = 0;
    while (accepted < samples_per_region) {
      if (++attempts > budget) {
        throw std::runtime_error(
            "sample_obstruction: rejection budget exhausted");
      }
      SphereDirection u = sample_one_direction(b, rng);
      if (assign_region(inst.cover, u) != r) continue;
      const double margin =
          kern::dot(inst.cover.vertex(r).data(), u.coords.data(), b);
      if (margin < inst.min_region_margin) inst.min_region_margin = margin;

      const std::vector<double> tp = delta_embed(inst.delta, u, +1);
      const std::vector<double> tm = delta_embed(inst.delta, u, -1);
      inst.e_plus.insert(inst.e_plus.end(), base.begin(), base.end());
      inst.e_plus.insert(inst.e_plus.end(), tp.begin(), tp.end());
      inst.e_minus.insert(inst.e_minus.end(), base.begin(), base.end());
      inst.e_minus.insert(inst.e_minus.end(), tm.begin(), tm.end());
      inst.sample_region.push_back(r);
      inst.directions.insert(inst.directions.end(), u.coords.begin(),
                             u.coords.end());
      ++accepted;
    }
  }
  return inst;
}

double dist_to_rows(const std::vector<double>& rows, std::size_t dim,
                    std::span<const double> x) {
  if (rows.empty()) throw std::invalid_argument("dist_to_rows: empty set");
  if (x.size() != dim || rows.size() % dim != 0) {
    throw std::invalid_argument("dist_to_rows: dimension mismatch");
  }
  double best = std::numeric_limits<double>::infinity();
  const std::size_t count = rows.size() / dim;
  for (std::size_t i = 0; i < count; ++i) {
    const double dd = kern::sqdist(rows.data() + i * dim, x.data(), dim);
    if (dd < best) best = dd;
  }
  return std::sqrt(best);
}

double target_g(const ObstructionInstance& inst, std::span<const double> x) {
  if (inst.sample_count() == 0) {
    throw std::invalid_argument("target_g: instance has no samples");
  }
  const double dp = dist_to_rows(inst.e_plus, inst.point_dim(), x);
  const double dm = dist_to_rows(inst.e_minus, inst.point_dim(), x);
  return dm / (dp + dm);
}

LabeledCubes build_labeled_cubes(int d, int n) {
  if (d < 1 || n < 1) {
    throw std::invalid_argument("build_labeled_cubes: need d>=1, n>=1");
  }
  LabeledCubes cubes;
  cubes.d = d;
  cubes.n = n;
  cubes.side = 1.0 / (2.0 * n);
  const double inset = 1.0 / (4.0 * n);
  cubes.scales.assign(static_cast<std::size_t>(n) * d, cubes.side);
  cubes.offsets.assign(static_cast<std::size_t>(n) * d, inset);
  for (int j = 0; j < n; ++j) {
    cubes.offsets[static_cast<std::size_t>(j) * d] =
        static_cast<double>(j) / n + inset;
  }
  return cubes;
}

std::vector<double> apply_cube_map(const LabeledCubes& cubes, int j,
                                   std::span<const double> t) {
  if (j < 1 || j > cubes.n) {
    throw std::invalid_argument("apply_cube_map: label out of range");
  }
  if (t.size() != static_cast<std::size_t>(cubes.d)) {
    throw std::invalid_argument("apply_cube_map: dimension mismatch");
  }
  std::vector<double> out(cubes.d);
  const std::size_t base = static_cast<std::size_t>(j - 1) * cubes.d;
  for (int c = 0; c < cubes.d; ++c) {
    if (t[c] < 0.0 || t[c] > 1.0) {
      throw std::invalid_argument("apply_cube_map: input outside unit cube");
    }
    out[c] = cubes.offsets[base + c] + cubes.scales[base + c] * t[c];
  }
  return out;
}

}  // namespace poolbound
