#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "poolbound/architectures.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/mlp.hpp"
#include "poolbound/rng.hpp"

using namespace poolbound;

namespace {

Mlp linear_member(std::size_t in, std::vector<double> weights, double bias) {
  Mlp net = make_zero_mlp({in, 1}, Activation::Identity);
  weights.push_back(bias);
  set_params(net, weights);
  return net;
}

PointConfig permuted(const PointConfig& x, const std::vector<int>& perm) {
  std::vector<double> coords;
  for (int i : perm) {
    auto p = x.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return make_point_config(x.d, x.n, coords);
}

double max_rel_err(const std::vector<double>& got,
                   const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    worst = std::max(worst,
                     std::abs(got[i] - want[i]) / (1.0 + std::abs(want[i])));
  }
  return worst;
}

}  // namespace

TEST_CASE("sum pooling with an identity member adds the points") {
  EncoderSpec enc = make_shared_encoder(EncoderKind::DeepSets, 1, 3, 1, 1,
                                        linear_member(1, {1.0}, 0.0));
  PointConfig x = make_point_config(1, 3, {0.1, 0.2, 0.3});
  auto code = encode(enc, x);
  REQUIRE(code.size() == 1);
  CHECK(std::abs(code[0] - 0.6) <= 1e-15);
}

TEST_CASE("ordered pair pooling with a linear member") {
  // member (a,b) -> a + 2b + 1/2 summed over all four ordered pairs:
  // 2*sum + 4*sum + 4/2 = 6*sum + 2 with sum = 1.
  EncoderSpec enc = make_shared_encoder(EncoderKind::SharedJanossy, 1, 2, 2, 1,
                                        linear_member(2, {1.0, 2.0}, 0.5));
  PointConfig x = make_point_config(1, 2, {0.3, 0.7});
  auto code = encode(enc, x);
  CHECK(std::abs(code[0] - 8.0) <= 1e-12);
}

TEST_CASE("shared encoders are permutation invariant") {
  Rng rng(derive_seed(31, "arch"));
  for (int k : {1, 2}) {
    EncoderSpec enc =
        random_encoder(EncoderKind::SharedJanossy, 2, 3, k, 3, {8},
                       Activation::Tanh, derive_seed(31, "arch-enc", k));
    std::vector<double> coords(6);
    for (double& c : coords) c = rng.uniform();
    PointConfig x = make_point_config(2, 3, coords);
    PointConfig y = permuted(x, {2, 0, 1});

    auto cx = encode(enc, x);
    auto cy = encode(enc, y);
    CHECK(max_rel_err(cx, cy) <= 1e-12);

    auto cxc = encode(enc, canonicalize(x));
    auto cyc = encode(enc, canonicalize(y));
    CHECK(cxc == cyc);
  }
}

TEST_CASE("canonicalize sorts points lexicographically") {
  PointConfig x =
      make_point_config(2, 3, {0.5, 0.1, 0.2, 0.9, 0.2, 0.3});
  PointConfig c = canonicalize(x);
  CHECK(c.coords == std::vector<double>{0.2, 0.3, 0.2, 0.9, 0.5, 0.1});
}

TEST_CASE("restriction to labeled cubes is the composed shared map") {
  const int settings[][3] = {{1, 3, 1}, {2, 3, 1}, {1, 4, 2}, {2, 4, 2}};
  for (const auto& s : settings) {
    const int d = s[0], n = s[1], k = s[2];
    EncoderSpec shared =
        random_encoder(EncoderKind::SharedJanossy, d, n, k, 2, {6},
                       Activation::Tanh, derive_seed(41, "restrict", d * 10 + k));
    LabeledCubes cubes = build_labeled_cubes(d, n);
    EncoderSpec restricted = restrict_to_labeled_copy(shared, cubes);
    CHECK_FALSE(restricted.shared());

    Rng rng(derive_seed(41, "restrict-input", n));
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> t(static_cast<std::size_t>(n) * d);
      for (double& c : t) c = rng.uniform();
      PointConfig raw = make_point_config(d, n, t);

      std::vector<double> mapped;
      for (int j = 1; j <= n; ++j) {
        auto p = raw.point(j - 1);
        auto q = apply_cube_map(cubes, j, {p.begin(), p.end()});
        mapped.insert(mapped.end(), q.begin(), q.end());
      }
      PointConfig image = make_point_config(d, n, mapped);

      auto got = encode(restricted, raw);
      auto want = encode(shared, image);
      CHECK(max_rel_err(got, want) <= 1e-12);
    }
  }
}

TEST_CASE("parameter counts for affine members") {
  Mlp member = make_zero_mlp({2, 3}, Activation::Identity);
  EncoderSpec shared =
      make_shared_encoder(EncoderKind::DeepSets, 2, 10, 1, 3, member);
  CHECK(count_parameters(shared) == 9);

  std::vector<Mlp> members(10, member);
  EncoderSpec indexed = make_indexed_encoder(2, 10, 1, 3, members);
  CHECK(count_parameters(indexed) == 90);
  CHECK(indexed.tuple_count() == 10);
}

TEST_CASE("member lookup is constant for shared and distinct for indexed") {
  EncoderSpec shared =
      random_encoder(EncoderKind::SharedJanossy, 1, 3, 1, 1, {4},
                     Activation::Tanh, derive_seed(43, "members-s"));
  CHECK(&shared.member_for(0) == &shared.member_for(2));

  EncoderSpec indexed =
      random_encoder(EncoderKind::IndexedJanossy, 1, 3, 1, 1, {4},
                     Activation::Tanh, derive_seed(43, "members-i"));
  CHECK(indexed.members.size() == 3);
  CHECK(flatten_params(indexed.member_for(0)) !=
        flatten_params(indexed.member_for(1)));
}

TEST_CASE("encoder gradients agree with central differences") {
  EncoderSpec enc =
      random_encoder(EncoderKind::SharedJanossy, 1, 3, 2, 2, {5},
                     Activation::Tanh, derive_seed(47, "arch-grad"));
  PointConfig x = make_point_config(1, 3, {0.2, 0.5, 0.9});
  std::vector<double> cot = {1.0, -0.5};

  auto input_fn = [&](std::span<const double> c) {
    auto code = encode(enc, make_point_config(1, 3, {c.begin(), c.end()}));
    return cot[0] * code[0] + cot[1] * code[1];
  };
  auto fd_in = finite_difference_gradient(input_fn, x.coords, 1e-5);
  auto got_in = encode_input_vjp(enc, x, cot);
  CHECK(max_rel_err(got_in, fd_in) <= 1e-5);

  std::vector<double> params = flatten_params(enc);
  auto param_fn = [&](std::span<const double> p) {
    EncoderSpec probe = enc;
    set_params(probe, p);
    auto code = encode(probe, x);
    return cot[0] * code[0] + cot[1] * code[1];
  };
  auto fd_p = finite_difference_gradient(param_fn, params, 1e-5);
  auto got_p = encode_param_vjp(enc, x, cot);
  CHECK(max_rel_err(got_p, fd_p) <= 1e-5);
}

TEST_CASE("model gradient covers encoder and decoder parameters") {
  Rng rng(derive_seed(53, "model"));
  Model model;
  model.encoder =
      random_encoder(EncoderKind::DeepSets, 1, 3, 1, 2, {6},
                     Activation::Tanh, derive_seed(53, "model-enc"));
  model.decoder = make_mlp({2, 6, 1}, Activation::Tanh, rng);
  PointConfig x = make_point_config(1, 3, {0.1, 0.6, 0.8});

  std::vector<double> grad;
  double value = model_param_vjp(model, x, grad);
  CHECK(value == model_eval(model, x));
  REQUIRE(grad.size() == count_parameters(model));

  std::vector<double> params = flatten_params(model);
  auto fn = [&](std::span<const double> p) {
    Model probe = model;
    set_params(probe, p);
    return model_eval(probe, x);
  };
  auto fd = finite_difference_gradient(fn, params, 1e-5);
  CHECK(max_rel_err(grad, fd) <= 1e-5);
}

TEST_CASE("construction validation") {
  CHECK_THROWS_AS(make_point_config(1, 2, {0.5, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(random_encoder(EncoderKind::DeepSets, 1, 3, 2, 1, {4},
                                 Activation::Tanh, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_shared_encoder(EncoderKind::SharedJanossy, 1, 3, 2, 1,
                                      linear_member(1, {1.0}, 0.0)),
                  std::invalid_argument);
}
