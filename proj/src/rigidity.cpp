#include "poolbound/rigidity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "poolbound/kernels.hpp"

namespace poolbound {

LatentMapFn latent_map_of(const EncoderSpec& enc) {
  return [enc](const PointConfig& x) { return encode(enc, x); };
}

LatentMapFn product_latent_map(int d, int n) {
  return [d, n](const PointConfig& x) {
    if (x.d != d || x.n != n) {
      throw std::invalid_argument("product_latent_map: dimensions mismatch");
    }
    double p = 1.0;
    for (double c : x.coords) p *= c;
    return std::vector<double>{p};
  };
}

PointConfig assemble_config(int d, int n, int k,
                            std::span<const double> base_coords,
                            std::span<const double> tail_coords) {
  if (base_coords.size() != static_cast<std::size_t>(k) * d ||
      tail_coords.size() != static_cast<std::size_t>(n - k) * d) {
    throw std::invalid_argument("assemble_config: block size mismatch");
  }
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * d);
  coords.insert(coords.end(), base_coords.begin(), base_coords.end());
  coords.insert(coords.end(), tail_coords.begin(), tail_coords.end());
  return make_point_config(d, n, std::move(coords));
}

CubeIncrement make_cube_increment(int d, int k, std::vector<double> base,
                                  std::vector<double> increment) {
  if (d < 1 || k < 1 ||
      base.size() != static_cast<std::size_t>(k) * d ||
      increment.size() != base.size()) {
    throw std::invalid_argument("make_cube_increment: size mismatch");
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double lo = base[i];
    const double hi = base[i] + increment[i];
    if (!(lo >= 0.0 && lo <= 1.0 && hi >= 0.0 && hi <= 1.0)) {
      throw std::invalid_argument(
          "make_cube_increment: corner outside the unit cube");
    }
  }
  CubeIncrement inc;
  inc.d = d;
  inc.k = k;
  inc.base = std::move(base);
  inc.increment = std::move(increment);
  return inc;
}

std::vector<double> alternating_difference(const LatentMapFn& phi, int d,
                                           int n, int k,
                                           const CubeIncrement& inc,
                                           std::span<const double> tail) {
  if (inc.d != d || inc.k != k) {
    throw std::invalid_argument("alternating_difference: increment mismatch");
  }
  std::vector<double> result;
  std::vector<double> corner(inc.base.size());
  const unsigned masks = 1u << k;
  for (unsigned eta = 0; eta < masks; ++eta) {
    for (int m = 0; m < k; ++m) {
      const bool on = (eta >> m) & 1u;
      for (int c = 0; c < d; ++c) {
        const std::size_t i = static_cast<std::size_t>(m) * d + c;
        corner[i] = on ? inc.base[i] + inc.increment[i] : inc.base[i];
      }
    }
    const PointConfig cfg = assemble_config(d, n, k, corner, tail);
    const std::vector<double> value = phi(cfg);
    const double sign = (std::popcount(eta) % 2 == 0) ? 1.0 : -1.0;
    if (result.empty()) {
      result.assign(value.size(), 0.0);
    } else if (value.size() != result.size()) {
      throw std::invalid_argument("alternating_difference: latent width varies");
    }
    kern::axpy(sign, value.data(), result.data(), value.size());
  }
  return result;
}

std::vector<double> alternating_difference(const EncoderSpec& enc,
                                           const CubeIncrement& inc,
                                           std::span<const double> tail) {
  return alternating_difference(latent_map_of(enc), enc.d, enc.n, enc.k, inc,
                                tail);
}

RigidityReport check_rigidity(const LatentMapFn& phi, int d, int n, int k,
                              const CubeIncrement& inc,
                              const std::vector<std::vector<double>>& tails,
                              double tolerance) {
  if (tails.size() < 2) {
    throw std::invalid_argument("check_rigidity: need at least two tails");
  }
  std::vector<double> lo, hi;
  for (const std::vector<double>& tail : tails) {
    const std::vector<double> delta =
        alternating_difference(phi, d, n, k, inc, tail);
    if (lo.empty()) {
      lo = delta;
      hi = delta;
      continue;
    }
    for (std::size_t c = 0; c < delta.size(); ++c) {
      if (delta[c] < lo[c]) lo[c] = delta[c];
      if (delta[c] > hi[c]) hi[c] = delta[c];
    }
  }
  RigidityReport rep;
  rep.d = d;
  rep.n = n;
  rep.k = k;
  rep.tails_tested = static_cast<int>(tails.size());
  rep.tolerance = tolerance;
  for (std::size_t c = 0; c < lo.size(); ++c) {
    rep.max_deviation = std::max(rep.max_deviation, hi[c] - lo[c]);
  }
  rep.passed = rep.max_deviation <= tolerance;
  return rep;
}

RigidityReport check_rigidity(const EncoderSpec& enc, const CubeIncrement& inc,
                              const std::vector<std::vector<double>>& tails,
                              double tolerance) {
  return check_rigidity(latent_map_of(enc), enc.d, enc.n, enc.k, inc, tails,
                        tolerance);
}

GridPropagationReport check_axes_to_grid(const EncoderSpec& enc,
                                         const BaseGrid& grid,
                                         const AxisSet& axis,
                                         std::span<const double> tail_u,
                                         std::span<const double> tail_v,
                                         double tolerance) {
  if (grid.d != enc.d || grid.n != enc.n || grid.k != enc.k) {
    throw std::invalid_argument("check_axes_to_grid: grid mismatch");
  }
  GridPropagationReport rep;
  rep.amplification = std::pow(2.0, enc.k);
  rep.tolerance = tolerance;

  const auto deviation_at = [&](std::span<const int> tuple) {
    const std::vector<double> base = grid.tuple_coords(tuple);
    const std::vector<double> a =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_u));
    const std::vector<double> b =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_v));
    return std::sqrt(kern::sqdist(a.data(), b.data(), a.size()));
  };

  for (const std::vector<int>& tuple : axis.tuples) {
    rep.axis_deviation = std::max(rep.axis_deviation, deviation_at(tuple));
  }
  rep.precondition_ok = rep.axis_deviation <= tolerance;

  std::vector<int> idx(grid.k, 0);
  bool more = true;
  while (more) {
    rep.grid_deviation = std::max(rep.grid_deviation, deviation_at(idx));
    more = false;
    for (std::size_t pos = idx.size(); pos-- > 0;) {
      if (++idx[pos] < grid.s) {
        more = true;
        break;
      }
      idx[pos] = 0;
    }
  }
  rep.passed = rep.precondition_ok &&
               rep.grid_deviation <= rep.amplification * tolerance;
  return rep;
}

}  // namespace poolbound
