#include "poolbound/architectures.hpp"

#include <algorithm>
#include <stdexcept>

#include "poolbound/kernels.hpp"

namespace poolbound {

namespace {

constexpr std::size_t kMaxTuples = 1u << 22;

std::size_t checked_tuple_count(int n, int k) {
  std::size_t acc = 1;
  for (int i = 0; i < k; ++i) {
    acc *= static_cast<std::size_t>(n);
    if (acc > kMaxTuples) {
      throw std::invalid_argument("encoder: n^k too large");
    }
  }
  return acc;
}

void check_encoder(const EncoderSpec& enc) {
  if (enc.d < 1 || enc.n < 1 || enc.k < 1 || enc.k > enc.n ||
      enc.latent_dim < 1) {
    throw std::invalid_argument("encoder: bad dimensions");
  }
  const std::size_t expect_members =
      enc.shared() ? 1 : checked_tuple_count(enc.n, enc.k);
  if (enc.members.size() != expect_members) {
    throw std::invalid_argument("encoder: member count mismatch");
  }
  if (enc.kind == EncoderKind::DeepSets && enc.k != 1) {
    throw std::invalid_argument("encoder: deep_sets requires k = 1");
  }
  for (const Mlp& m : enc.members) {
    if (m.input_width() != static_cast<std::size_t>(enc.k) * enc.d) {
      throw std::invalid_argument("encoder: member input width mismatch");
    }
    if (m.output_width() != static_cast<std::size_t>(enc.latent_dim)) {
      throw std::invalid_argument("encoder: member output width mismatch");
    }
  }
}

bool next_label_tuple(std::vector<int>& idx, int n) {
  for (std::size_t pos = idx.size(); pos-- > 0;) {
    if (++idx[pos] < n) return true;
    idx[pos] = 0;
  }
  return false;
}

}  // namespace

std::span<const double> PointConfig::point(int i) const {
  return std::span<const double>(coords.data() + static_cast<std::size_t>(i) * d,
                                 static_cast<std::size_t>(d));
}

PointConfig make_point_config(int d, int n, std::vector<double> coords) {
  if (d < 1 || n < 1 ||
      coords.size() != static_cast<std::size_t>(n) * d) {
    throw std::invalid_argument("make_point_config: dimension mismatch");
  }
  for (double c : coords) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument(
          "make_point_config: coordinate outside the unit cube");
    }
  }
  PointConfig x;
  x.d = d;
  x.n = n;
  x.coords = std::move(coords);
  return x;
}

PointConfig canonicalize(const PointConfig& x) {
  std::vector<std::span<const double>> pts;
  pts.reserve(x.n);
  for (int i = 0; i < x.n; ++i) pts.push_back(x.point(i));
  std::stable_sort(pts.begin(), pts.end(),
                   [](std::span<const double> a, std::span<const double> b) {
                     return std::lexicographical_compare(a.begin(), a.end(),
                                                         b.begin(), b.end());
                   });
  PointConfig out;
  out.d = x.d;
  out.n = x.n;
  out.coords.reserve(x.coords.size());
  for (const auto& p : pts) out.coords.insert(out.coords.end(), p.begin(), p.end());
  return out;
}

const char* encoder_kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::DeepSets: return "deep_sets";
    case EncoderKind::SharedJanossy: return "shared_janossy";
    case EncoderKind::IndexedJanossy: return "indexed_janossy";
  }
  return "deep_sets";
}

EncoderKind encoder_kind_from_name(const std::string& name) {
  if (name == "deep_sets") return EncoderKind::DeepSets;
  if (name == "shared_janossy") return EncoderKind::SharedJanossy;
  if (name == "indexed_janossy") return EncoderKind::IndexedJanossy;
  throw std::invalid_argument("unknown encoder kind: " + name);
}

std::size_t EncoderSpec::tuple_count() const {
  return checked_tuple_count(n, k);
}

const Mlp& EncoderSpec::member_for(std::size_t flat_tuple_index) const {
  return shared() ? members[0] : members[flat_tuple_index];
}

EncoderSpec make_shared_encoder(EncoderKind kind, int d, int n, int k,
                                int latent_dim, Mlp phi) {
  if (kind == EncoderKind::IndexedJanossy) {
    throw std::invalid_argument("make_shared_encoder: kind must be shared");
  }
  EncoderSpec enc;
  enc.kind = kind;
  enc.d = d;
  enc.n = n;
  enc.k = k;
  enc.latent_dim = latent_dim;
  enc.members.push_back(std::move(phi));
  check_encoder(enc);
  return enc;
}

EncoderSpec make_indexed_encoder(int d, int n, int k, int latent_dim,
                                 std::vector<Mlp> members) {
  EncoderSpec enc;
  enc.kind = EncoderKind::IndexedJanossy;
  enc.d = d;
  enc.n = n;
  enc.k = k;
  enc.latent_dim = latent_dim;
  enc.members = std::move(members);
  check_encoder(enc);
  return enc;
}

EncoderSpec random_encoder(EncoderKind kind, int d, int n, int k,
                           int latent_dim, std::vector<std::size_t> hidden,
                           Activation act, std::uint64_t seed) {
  std::vector<std::size_t> widths;
  widths.push_back(static_cast<std::size_t>(k) * d);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(static_cast<std::size_t>(latent_dim));

  const std::size_t count =
      kind == EncoderKind::IndexedJanossy ? checked_tuple_count(n, k) : 1;
  std::vector<Mlp> members;
  members.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "encoder-member", i));
    members.push_back(make_mlp(widths, act, rng));
  }
  if (kind == EncoderKind::IndexedJanossy) {
    return make_indexed_encoder(d, n, k, latent_dim, std::move(members));
  }
  return make_shared_encoder(kind, d, n, k, latent_dim, std::move(members[0]));
}

std::vector<double> encode(const EncoderSpec& enc, const PointConfig& x) {
  check_encoder(enc);
  if (x.d != enc.d || x.n != enc.n) {
    throw std::invalid_argument("encode: config dimensions mismatch");
  }
  const std::size_t dim = static_cast<std::size_t>(enc.k) * enc.d;
  std::vector<double> latent(static_cast<std::size_t>(enc.latent_dim), 0.0);
  std::vector<double> tuple_in(dim);
  std::vector<int> idx(enc.k, 0);
  std::size_t flat = 0;
  do {
    for (int m = 0; m < enc.k; ++m) {
      const auto p = x.point(idx[m]);
      std::copy(p.begin(), p.end(),
                tuple_in.begin() + static_cast<std::size_t>(m) * enc.d);
    }
    const std::vector<double> out =
        mlp_forward(enc.member_for(flat), tuple_in);
    kern::axpy(1.0, out.data(), latent.data(), latent.size());
    ++flat;
  } while (next_label_tuple(idx, enc.n));
  return latent;
}

std::vector<double> encode_input_vjp(const EncoderSpec& enc,
                                     const PointConfig& x,
                                     std::span<const double> cotangent) {
  check_encoder(enc);
  if (x.d != enc.d || x.n != enc.n) {
    throw std::invalid_argument("encode_input_vjp: config dimensions mismatch");
  }
  if (cotangent.size() != static_cast<std::size_t>(enc.latent_dim)) {
    throw std::invalid_argument("encode_input_vjp: cotangent width mismatch");
  }
  const std::size_t dim = static_cast<std::size_t>(enc.k) * enc.d;
  std::vector<double> grad(x.coords.size(), 0.0);
  std::vector<double> tuple_in(dim);
  std::vector<int> idx(enc.k, 0);
  std::size_t flat = 0;
  do {
    for (int m = 0; m < enc.k; ++m) {
      const auto p = x.point(idx[m]);
      std::copy(p.begin(), p.end(),
                tuple_in.begin() + static_cast<std::size_t>(m) * enc.d);
    }
    MlpVjp v = mlp_vjp(enc.member_for(flat), tuple_in, cotangent);
    for (int m = 0; m < enc.k; ++m) {
      kern::axpy(1.0, v.input_grad.data() + static_cast<std::size_t>(m) * enc.d,
                 grad.data() + static_cast<std::size_t>(idx[m]) * enc.d,
                 static_cast<std::size_t>(enc.d));
    }
    ++flat;
  } while (next_label_tuple(idx, enc.n));
  return grad;
}

std::vector<double> encode_param_vjp(const EncoderSpec& enc,
                                     const PointConfig& x,
                                     std::span<const double> cotangent) {
  check_encoder(enc);
  if (x.d != enc.d || x.n != enc.n) {
    throw std::invalid_argument("encode_param_vjp: config dimensions mismatch");
  }
  if (cotangent.size() != static_cast<std::size_t>(enc.latent_dim)) {
    throw std::invalid_argument("encode_param_vjp: cotangent width mismatch");
  }
  std::vector<std::size_t> offsets(enc.members.size(), 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < enc.members.size(); ++i) {
    offsets[i] = total;
    total += enc.members[i].parameter_count();
  }
  std::vector<double> grad(total, 0.0);

  const std::size_t dim = static_cast<std::size_t>(enc.k) * enc.d;
  std::vector<double> tuple_in(dim);
  std::vector<int> idx(enc.k, 0);
  std::size_t flat = 0;
  do {
    for (int m = 0; m < enc.k; ++m) {
      const auto p = x.point(idx[m]);
      std::copy(p.begin(), p.end(),
                tuple_in.begin() + static_cast<std::size_t>(m) * enc.d);
    }
    const std::size_t member_index = enc.shared() ? 0 : flat;
    MlpVjp v = mlp_vjp(enc.members[member_index], tuple_in, cotangent);
    kern::axpy(1.0, v.param_grad.data(), grad.data() + offsets[member_index],
               v.param_grad.size());
    ++flat;
  } while (next_label_tuple(idx, enc.n));
  return grad;
}

std::size_t count_parameters(const EncoderSpec& enc) {
  std::size_t p = 0;
  for (const Mlp& m : enc.members) p += m.parameter_count();
  return p;
}

std::vector<double> flatten_params(const EncoderSpec& enc) {
  std::vector<double> flat;
  flat.reserve(count_parameters(enc));
  for (const Mlp& m : enc.members) {
    const std::vector<double> mp = flatten_params(m);
    flat.insert(flat.end(), mp.begin(), mp.end());
  }
  return flat;
}

void set_params(EncoderSpec& enc, std::span<const double> params) {
  if (params.size() != count_parameters(enc)) {
    throw std::invalid_argument("set_params: encoder parameter count mismatch");
  }
  std::size_t off = 0;
  for (Mlp& m : enc.members) {
    set_params(m, params.subspan(off, m.parameter_count()));
    off += m.parameter_count();
  }
}

EncoderSpec indexed_embedding(const EncoderSpec& shared) {
  if (!shared.shared()) {
    throw std::invalid_argument("indexed_embedding: encoder already indexed");
  }
  std::vector<Mlp> members(shared.tuple_count(), shared.members[0]);
  return make_indexed_encoder(shared.d, shared.n, shared.k, shared.latent_dim,
                              std::move(members));
}

EncoderSpec restrict_to_labeled_copy(const EncoderSpec& shared,
                                     const LabeledCubes& cubes) {
  if (!shared.shared()) {
    throw std::invalid_argument("restrict_to_labeled_copy: encoder must be shared");
  }
  if (cubes.d != shared.d || cubes.n != shared.n) {
    throw std::invalid_argument("restrict_to_labeled_copy: cube dimensions mismatch");
  }
  const Mlp& phi = shared.members[0];
  const std::size_t dim = static_cast<std::size_t>(shared.k) * shared.d;

  std::vector<Mlp> members;
  members.reserve(shared.tuple_count());
  std::vector<int> idx(shared.k, 0);
  std::vector<double> scale(dim), offset(dim);
  do {
    for (int m = 0; m < shared.k; ++m) {
      const std::size_t cube = static_cast<std::size_t>(idx[m]) * shared.d;
      for (int c = 0; c < shared.d; ++c) {
        scale[static_cast<std::size_t>(m) * shared.d + c] = cubes.scales[cube + c];
        offset[static_cast<std::size_t>(m) * shared.d + c] = cubes.offsets[cube + c];
      }
    }
    Mlp copy = phi;
    DenseLayer& first = copy.layers[0];
    const std::size_t rows = first.weight.rows();
    for (std::size_t r = 0; r < rows; ++r) {
      double* wrow = first.weight.data.data() + r * dim;
      first.bias[r] += kern::dot(wrow, offset.data(), dim);
      for (std::size_t c = 0; c < dim; ++c) wrow[c] *= scale[c];
    }
    members.push_back(std::move(copy));
  } while (next_label_tuple(idx, shared.n));

  return make_indexed_encoder(shared.d, shared.n, shared.k, shared.latent_dim,
                              std::move(members));
}

double model_eval(const Model& model, const PointConfig& x) {
  if (model.decoder.input_width() !=
          static_cast<std::size_t>(model.encoder.latent_dim) ||
      model.decoder.output_width() != 1) {
    throw std::invalid_argument("model_eval: decoder width mismatch");
  }
  const std::vector<double> latent = encode(model.encoder, x);
  return mlp_forward(model.decoder, latent)[0];
}

double model_param_vjp(const Model& model, const PointConfig& x,
                       std::vector<double>& grad) {
  const std::vector<double> latent = encode(model.encoder, x);
  MlpTrace trace;
  const std::vector<double> out =
      mlp_forward_trace(model.decoder, latent, trace);
  const double one = 1.0;
  MlpVjp dec = mlp_vjp_with_trace(model.decoder, trace,
                                  std::span<const double>(&one, 1));
  const std::vector<double> enc_grad =
      encode_param_vjp(model.encoder, x, dec.input_grad);
  grad.clear();
  grad.reserve(enc_grad.size() + dec.param_grad.size());
  grad.insert(grad.end(), enc_grad.begin(), enc_grad.end());
  grad.insert(grad.end(), dec.param_grad.begin(), dec.param_grad.end());
  return out[0];
}

std::size_t count_parameters(const Model& model) {
  return count_parameters(model.encoder) + model.decoder.parameter_count();
}

std::vector<double> flatten_params(const Model& model) {
  std::vector<double> flat = flatten_params(model.encoder);
  const std::vector<double> dec = flatten_params(model.decoder);
  flat.insert(flat.end(), dec.begin(), dec.end());
  return flat;
}

void set_params(Model& model, std::span<const double> params) {
  const std::size_t ep = count_parameters(model.encoder);
  if (params.size() != ep + model.decoder.parameter_count()) {
    throw std::invalid_argument("set_params: model parameter count mismatch");
  }
  set_params(model.encoder, params.subspan(0, ep));
  set_params(model.decoder, params.subspan(ep));
}

}  // namespace poolbound
