#pragma once

#include <functional>
#include <span>
#include <vector>

#include "poolbound/architectures.hpp"
#include "poolbound/constructions.hpp"

namespace poolbound {

using LatentMapFn = std::function<std::vector<double>(const PointConfig&)>;

LatentMapFn latent_map_of(const EncoderSpec& enc);

// Multiplicative map prod of all coordinates (latent width 1). Not a
// tuple-sum pooling map; serves as the negative control.
LatentMapFn product_latent_map(int d, int n);

// Full configuration (first k points from base block coords, remaining n-k
// from the tail).
PointConfig assemble_config(int d, int n, int k,
                            std::span<const double> base_coords,
                            std::span<const double> tail_coords);

// Axis-aligned box in the first k slots: corners a + eta . y, eta in {0,1}^k
// (slot m shifted by y_m as a whole d-vector). All corners must stay inside
// the unit cube.
struct CubeIncrement {
  int d = 0;
  int k = 0;
  std::vector<double> base;       // k x d
  std::vector<double> increment;  // k x d
};

CubeIncrement make_cube_increment(int d, int k, std::vector<double> base,
                                  std::vector<double> increment);

// sum over eta in {0,1}^k of (-1)^|eta| Phi(a + eta.y, tail).
std::vector<double> alternating_difference(const LatentMapFn& phi, int d,
                                           int n, int k,
                                           const CubeIncrement& inc,
                                           std::span<const double> tail);
std::vector<double> alternating_difference(const EncoderSpec& enc,
                                           const CubeIncrement& inc,
                                           std::span<const double> tail);

struct RigidityReport {
  int d = 0;
  int n = 0;
  int k = 0;
  double max_deviation = 0.0;  // max over coords of spread across tails
  int tails_tested = 0;
  double tolerance = 0.0;
  bool passed = false;
};

// For tuple-sum pooling maps the alternating difference is tail-independent;
// the report carries the worst spread across the supplied tails.
RigidityReport check_rigidity(const LatentMapFn& phi, int d, int n, int k,
                              const CubeIncrement& inc,
                              const std::vector<std::vector<double>>& tails,
                              double tolerance);
RigidityReport check_rigidity(const EncoderSpec& enc, const CubeIncrement& inc,
                              const std::vector<std::vector<double>>& tails,
                              double tolerance);

struct GridPropagationReport {
  double axis_deviation = 0.0;  // max over axis tuples of latent diff 2-norm
  double grid_deviation = 0.0;  // max over all grid tuples
  double amplification = 0.0;   // 2^k
  double tolerance = 0.0;
  bool precondition_ok = false;  // axis_deviation <= tolerance
  bool passed = false;           // and grid_deviation <= amplification * tolerance
};

// If two tails agree on every axis tuple to within `tolerance`, they agree on
// the whole grid to within 2^k * tolerance: each grid value is recovered from
// axis terms plus the tail-invariant alternating sum.
GridPropagationReport check_axes_to_grid(const EncoderSpec& enc,
                                         const BaseGrid& grid,
                                         const AxisSet& axis,
                                         std::span<const double> tail_u,
                                         std::span<const double> tail_v,
                                         double tolerance);

}  // namespace poolbound
