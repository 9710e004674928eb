#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "poolbound/architectures.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/rigidity.hpp"
#include "poolbound/rng.hpp"

using namespace poolbound;

namespace {

// Hand-worked values for the alternating difference
//   sum over eta in {0,1}^k of (-1)^|eta| Phi(a + eta.y, tail).
//
// Slot-weighted linear map Phi(X) = sum_j (j+1) x_j at d=1, n=3, k=1:
// only slot 0 changes, so the sum collapses to Phi(a) - Phi(a+y) = -y.
//
// Square-of-sum map Phi(X) = (sum_j x_j)^2 at d=1, n=4, k=2 with
// increments y1, y2 and S = total of all four coordinates:
//   S^2 - (S+y1)^2 - (S+y2)^2 + (S+y1+y2)^2 = 2 y1 y2
// for every tail.
//
// Product map Phi(X) = x0 x1 x2 at d=1, n=3, k=1 (not a tuple sum):
//   Phi(a,t) - Phi(a+y,t) = -y t1 t2,
// so tails (0.9,0.9) and (0.1,0.1) with y=0.3 give -0.243 and -0.003,
// a spread of 0.24.

LatentMapFn slot_weighted_map(int n) {
  return [n](const PointConfig& x) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += (j + 1) * x.coords[j];
    return std::vector<double>{acc};
  };
}

LatentMapFn square_of_sum_map() {
  return [](const PointConfig& x) {
    const double s =
        std::accumulate(x.coords.begin(), x.coords.end(), 0.0);
    return std::vector<double>{s * s};
  };
}

Mlp linear_member(int in, const std::vector<double>& weights, double bias) {
  Mlp m = make_zero_mlp({static_cast<std::size_t>(in), 1}, Activation::Identity);
  std::vector<double> params = weights;
  params.push_back(bias);
  set_params(m, params);
  return m;
}

std::vector<double> random_tail(int len, Rng& rng) {
  std::vector<double> t(len);
  for (double& v : t) v = rng.uniform(0.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("alternating difference of a slot-weighted linear map is -y") {
  const CubeIncrement inc = make_cube_increment(1, 1, {0.2}, {0.3});
  const LatentMapFn phi = slot_weighted_map(3);
  for (const std::vector<double>& tail :
       {std::vector<double>{0.0, 0.0}, std::vector<double>{0.9, 0.1},
        std::vector<double>{0.4, 0.7}}) {
    const std::vector<double> delta =
        alternating_difference(phi, 1, 3, 1, inc, tail);
    REQUIRE(delta.size() == 1);
    CHECK(std::abs(delta[0] - (-0.3)) <= 1e-12);
  }
}

TEST_CASE("alternating difference of the square-of-sum map is 2 y1 y2") {
  const double y1 = 0.3;
  const double y2 = 0.2;
  const CubeIncrement inc = make_cube_increment(1, 2, {0.1, 0.2}, {y1, y2});
  const LatentMapFn phi = square_of_sum_map();
  for (const std::vector<double>& tail :
       {std::vector<double>{0.0, 0.0}, std::vector<double>{0.5, 0.5},
        std::vector<double>{0.95, 0.05}}) {
    const std::vector<double> delta =
        alternating_difference(phi, 1, 4, 2, inc, tail);
    REQUIRE(delta.size() == 1);
    CHECK(std::abs(delta[0] - 2.0 * y1 * y2) <= 1e-12);
  }
}

TEST_CASE("product map deviation matches the closed form and fails rigidity") {
  const CubeIncrement inc = make_cube_increment(1, 1, {0.2}, {0.3});
  const LatentMapFn phi = product_latent_map(1, 3);

  const std::vector<double> tail_hi = {0.9, 0.9};
  const std::vector<double> tail_lo = {0.1, 0.1};
  const std::vector<double> hi =
      alternating_difference(phi, 1, 3, 1, inc, tail_hi);
  const std::vector<double> lo =
      alternating_difference(phi, 1, 3, 1, inc, tail_lo);
  CHECK(std::abs(hi[0] - (-0.243)) <= 1e-12);
  CHECK(std::abs(lo[0] - (-0.003)) <= 1e-12);

  const RigidityReport rep = check_rigidity(
      phi, 1, 3, 1, inc, {{0.9, 0.9}, {0.1, 0.1}}, 1e-9);
  CHECK_FALSE(rep.passed);
  CHECK(std::abs(rep.max_deviation - 0.24) <= 1e-12);
  CHECK(rep.max_deviation > 1e-3);
  CHECK(rep.tails_tested == 2);
  CHECK(rep.tolerance == 1e-9);
}

TEST_CASE("tuple-sum encoders pass rigidity across random tails") {
  struct Setting {
    EncoderKind kind;
    int d, n, k, latent;
  };
  const std::vector<Setting> settings = {
      {EncoderKind::DeepSets, 1, 3, 1, 1},
      {EncoderKind::DeepSets, 2, 4, 1, 3},
      {EncoderKind::SharedJanossy, 1, 4, 2, 2},
      {EncoderKind::IndexedJanossy, 1, 3, 1, 1},
      {EncoderKind::IndexedJanossy, 2, 4, 2, 2},
  };
  for (const Setting& st : settings) {
    for (std::uint64_t e = 0; e < 3; ++e) {
      CAPTURE(static_cast<int>(st.kind));
      CAPTURE(st.d);
      CAPTURE(st.k);
      CAPTURE(e);
      const EncoderSpec enc =
          random_encoder(st.kind, st.d, st.n, st.k, st.latent, {8, 8},
                         Activation::Tanh, derive_seed(17, "rigid-enc", e));
      Rng rng(derive_seed(17, "rigid-tail", e * 100 + st.n));
      std::vector<double> base(st.k * st.d), incr(st.k * st.d);
      for (double& v : base) v = rng.uniform(0.0, 0.45);
      for (double& v : incr) v = rng.uniform(0.05, 0.5);
      const CubeIncrement inc =
          make_cube_increment(st.d, st.k, base, incr);
      std::vector<std::vector<double>> tails;
      for (int t = 0; t < 5; ++t) {
        tails.push_back(random_tail((st.n - st.k) * st.d, rng));
      }
      const RigidityReport rep = check_rigidity(enc, inc, tails, 1e-9);
      CHECK(rep.passed);
      CHECK(rep.max_deviation <= 1e-9);
      CHECK(rep.tails_tested == 5);
    }
  }
}

TEST_CASE("encoder overload agrees with the wrapped latent map") {
  const EncoderSpec enc = random_encoder(EncoderKind::DeepSets, 1, 3, 1, 2,
                                         {6}, Activation::Tanh, 5);
  const CubeIncrement inc = make_cube_increment(1, 1, {0.3}, {0.25});
  const std::vector<double> tail = {0.6, 0.1};
  const std::vector<double> a = alternating_difference(enc, inc, tail);
  const std::vector<double> b =
      alternating_difference(latent_map_of(enc), 1, 3, 1, inc, tail);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("zero-parameter encoder has exactly zero alternating difference") {
  const EncoderSpec enc = make_shared_encoder(
      EncoderKind::DeepSets, 1, 3, 1, 2,
      make_zero_mlp({1, 4, 2}, Activation::Tanh));
  const CubeIncrement inc = make_cube_increment(1, 1, {0.1}, {0.4});
  const std::vector<double> tail = {0.3, 0.8};
  const std::vector<double> delta = alternating_difference(enc, inc, tail);
  for (double v : delta) CHECK(v == 0.0);
  const RigidityReport rep =
      check_rigidity(enc, inc, {{0.0, 0.0}, {1.0, 1.0}, {0.2, 0.7}}, 1e-9);
  CHECK(rep.passed);
  CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("rigidity check input validation") {
  const CubeIncrement inc = make_cube_increment(1, 1, {0.2}, {0.3});
  CHECK_THROWS_AS(check_rigidity(slot_weighted_map(3), 1, 3, 1, inc,
                                 {{0.1, 0.1}}, 1e-9),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cube_increment(1, 1, {0.9}, {0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cube_increment(1, 1, {-0.1}, {0.2}),
                  std::invalid_argument);
  const PointConfig wrong = make_point_config(2, 3, std::vector<double>(6, 0.5));
  CHECK_THROWS_AS(product_latent_map(1, 3)(wrong), std::invalid_argument);
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(assemble_config(1, 3, 1, one, one), std::invalid_argument);
}

TEST_CASE("axis agreement propagates to the grid for swapped tails") {
  // Shared encoders are symmetric in the tail slots, so swapping two tail
  // points moves the axis values by at most summation roundoff. The grid
  // deviation must then stay within 2^k times the axis tolerance.
  struct Setting {
    EncoderKind kind;
    int d, n, k;
  };
  for (const Setting& st : {Setting{EncoderKind::DeepSets, 1, 4, 1},
                            Setting{EncoderKind::SharedJanossy, 1, 4, 2},
                            Setting{EncoderKind::DeepSets, 2, 4, 1}}) {
    const EncoderSpec enc = random_encoder(st.kind, st.d, st.n, st.k, 3,
                                           {8}, Activation::Tanh,
                                           derive_seed(23, "prop-enc", st.k));
    const BaseGrid grid = build_grid(st.d, st.n, st.k);
    const AxisSet axis = build_axis_set(grid);
    Rng rng(derive_seed(23, "prop-tail", st.n + st.k));
    const int tail_len = (st.n - st.k) * st.d;
    std::vector<double> u = random_tail(tail_len, rng);
    std::vector<double> v = u;
    for (int c = 0; c < st.d; ++c) std::swap(v[c], v[tail_len - st.d + c]);

    const GridPropagationReport rep =
        check_axes_to_grid(enc, grid, axis, u, v, 1e-12);
    CHECK(rep.precondition_ok);
    CHECK(rep.passed);
    CHECK(rep.axis_deviation <= 1e-12);
    CHECK(rep.grid_deviation <= rep.amplification * 1e-12);
    CHECK(rep.amplification == std::pow(2.0, st.k));
  }
}

TEST_CASE("axis propagation with a small genuine deviation") {
  // Indexed linear members: the latent difference between two tails is the
  // same at every base, so axis and grid deviations coincide exactly.
  std::vector<Mlp> members;
  members.push_back(linear_member(1, {1.0}, 0.0));
  members.push_back(linear_member(1, {0.5}, 0.0));
  members.push_back(linear_member(1, {0.5}, 0.0));
  const EncoderSpec enc = make_indexed_encoder(1, 3, 1, 1, members);
  const BaseGrid grid = build_grid(1, 3, 1);
  const AxisSet axis = build_axis_set(grid);

  const double bump = 2e-13;
  const std::vector<double> u = {0.5, 0.5};
  const std::vector<double> v = {0.5, 0.5 + bump};
  const GridPropagationReport rep =
      check_axes_to_grid(enc, grid, axis, u, v, 1e-12);
  CHECK(rep.precondition_ok);
  CHECK(rep.passed);
  CHECK(rep.axis_deviation > 0.0);
  CHECK(std::abs(rep.axis_deviation - 0.5 * bump) <= 2e-15);
  CHECK(std::abs(rep.grid_deviation - rep.axis_deviation) <= 2e-15);
}

TEST_CASE("axis propagation reports a failed precondition for far tails") {
  const EncoderSpec enc = random_encoder(EncoderKind::DeepSets, 1, 3, 1, 2,
                                         {8}, Activation::Tanh, 41);
  const BaseGrid grid = build_grid(1, 3, 1);
  const AxisSet axis = build_axis_set(grid);
  const GridPropagationReport rep = check_axes_to_grid(
      enc, grid, axis, std::vector<double>{0.1, 0.2},
      std::vector<double>{0.8, 0.9}, 1e-6);
  CHECK_FALSE(rep.precondition_ok);
  CHECK_FALSE(rep.passed);
  CHECK(rep.axis_deviation > 1e-3);
  CHECK(rep.tolerance == 1e-6);
}

TEST_CASE("axis propagation rejects a mismatched grid") {
  const EncoderSpec enc = random_encoder(EncoderKind::DeepSets, 1, 3, 1, 2,
                                         {4}, Activation::Tanh, 7);
  const BaseGrid grid = build_grid(1, 4, 1);
  const AxisSet axis = build_axis_set(grid);
  const std::vector<double> tail = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(check_axes_to_grid(enc, grid, axis, tail, tail, 1e-9),
                  std::invalid_argument);
}
