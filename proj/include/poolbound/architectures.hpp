#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poolbound/constructions.hpp"
#include "poolbound/mlp.hpp"

namespace poolbound {

// n points in the closed unit cube [0,1]^d, row-major.
struct PointConfig {
  int d = 0;
  int n = 0;
  std::vector<double> coords;  // n x d

  std::span<const double> point(int i) const;  // i in 0..n-1
};

PointConfig make_point_config(int d, int n, std::vector<double> coords);

// Points sorted lexicographically; fixes the summation order so permuted
// inputs evaluate identically bit for bit.
PointConfig canonicalize(const PointConfig& x);

enum class EncoderKind { DeepSets, SharedJanossy, IndexedJanossy };

const char* encoder_kind_name(EncoderKind k);
EncoderKind encoder_kind_from_name(const std::string& name);

// Tuple-sum pooling encoder. Shared kinds hold one member net phi applied to
// every ordered k-tuple; the indexed kind holds n^k members, one per tuple
// in lexicographic order. DeepSets is exactly SharedJanossy with k = 1.
struct EncoderSpec {
  EncoderKind kind = EncoderKind::DeepSets;
  int d = 0;
  int n = 0;
  int k = 0;
  int latent_dim = 0;
  std::vector<Mlp> members;

  bool shared() const { return kind != EncoderKind::IndexedJanossy; }
  std::size_t tuple_count() const;
  const Mlp& member_for(std::size_t flat_tuple_index) const;
};

EncoderSpec make_shared_encoder(EncoderKind kind, int d, int n, int k,
                                int latent_dim, Mlp phi);
EncoderSpec make_indexed_encoder(int d, int n, int k, int latent_dim,
                                 std::vector<Mlp> members);
// Hidden widths apply to every member; seeded Glorot-uniform init.
EncoderSpec random_encoder(EncoderKind kind, int d, int n, int k,
                           int latent_dim, std::vector<std::size_t> hidden,
                           Activation act, std::uint64_t seed);

// Sum over all n^k ordered tuples (lexicographic) of the member applied to
// the concatenated tuple coordinates.
std::vector<double> encode(const EncoderSpec& enc, const PointConfig& x);

// Gradient of <cotangent, encode(x)> with respect to every input coordinate.
std::vector<double> encode_input_vjp(const EncoderSpec& enc,
                                     const PointConfig& x,
                                     std::span<const double> cotangent);

// Gradient with respect to all member parameters (members concatenated in
// order).
std::vector<double> encode_param_vjp(const EncoderSpec& enc,
                                     const PointConfig& x,
                                     std::span<const double> cotangent);

std::size_t count_parameters(const EncoderSpec& enc);
std::vector<double> flatten_params(const EncoderSpec& enc);
void set_params(EncoderSpec& enc, std::span<const double> params);

// Explicit per-tuple table of a shared encoder (every member equal to phi).
EncoderSpec indexed_embedding(const EncoderSpec& shared);

// Indexed encoder phi_I = phi composed with the tuple of cube maps
// (T_{i_1}, ..., T_{i_k}); the affine maps are absorbed into each copy's
// first layer.
EncoderSpec restrict_to_labeled_copy(const EncoderSpec& shared,
                                     const LabeledCubes& cubes);

struct Model {
  EncoderSpec encoder;
  Mlp decoder;  // latent_dim -> 1
};

double model_eval(const Model& model, const PointConfig& x);

// Value plus gradient with respect to [encoder params..., decoder params].
double model_param_vjp(const Model& model, const PointConfig& x,
                       std::vector<double>& grad);

std::size_t count_parameters(const Model& model);
std::vector<double> flatten_params(const Model& model);
void set_params(Model& model, std::span<const double> params);

}  // namespace poolbound
