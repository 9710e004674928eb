#include "poolbound/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "poolbound/kernels.hpp"

namespace poolbound {

namespace {

void require_key(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw std::invalid_argument(std::string("missing field: ") + key);
  }
}

std::vector<double> doubles_from(const Json& j, const char* key) {
  require_key(j, key);
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

Json mlp_to_json(const Mlp& net) {
  Json j;
  j["widths"] = net.widths;
  j["activation"] = activation_name(net.activation);
  j["params"] = flatten_params(net);
  return j;
}

Mlp mlp_from_json(const Json& j) {
  require_key(j, "widths");
  require_key(j, "activation");
  require_key(j, "params");
  auto widths = j.at("widths").get<std::vector<std::size_t>>();
  Mlp net = make_zero_mlp(widths,
                          activation_from_name(j.at("activation").get<std::string>()));
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.parameter_count()) {
    throw std::invalid_argument("net parameter list does not match widths");
  }
  set_params(net, params);
  return net;
}

Json encoder_to_json(const EncoderSpec& enc) {
  Json j;
  j["kind"] = encoder_kind_name(enc.kind);
  j["d"] = enc.d;
  j["n"] = enc.n;
  j["k"] = enc.k;
  j["latent_dim"] = enc.latent_dim;
  Json members = Json::array();
  for (const Mlp& m : enc.members) members.push_back(mlp_to_json(m));
  j["members"] = members;
  return j;
}

EncoderSpec encoder_from_json(const Json& j) {
  for (const char* key : {"kind", "d", "n", "k", "latent_dim", "members"}) {
    require_key(j, key);
  }
  EncoderKind kind = encoder_kind_from_name(j.at("kind").get<std::string>());
  const int d = j.at("d").get<int>();
  const int n = j.at("n").get<int>();
  const int k = j.at("k").get<int>();
  const int latent = j.at("latent_dim").get<int>();
  std::vector<Mlp> members;
  for (const Json& m : j.at("members")) members.push_back(mlp_from_json(m));
  if (kind == EncoderKind::IndexedJanossy) {
    return make_indexed_encoder(d, n, k, latent, std::move(members));
  }
  if (members.size() != 1) {
    throw std::invalid_argument("shared encoder must store exactly one member");
  }
  return make_shared_encoder(kind, d, n, k, latent, std::move(members.front()));
}

Json model_to_json(const Model& model) {
  Json j;
  j["encoder"] = encoder_to_json(model.encoder);
  j["decoder"] = mlp_to_json(model.decoder);
  return j;
}

Model model_from_json(const Json& j) {
  require_key(j, "encoder");
  require_key(j, "decoder");
  Model model;
  model.encoder = encoder_from_json(j.at("encoder"));
  model.decoder = mlp_from_json(j.at("decoder"));
  return model;
}

Json instance_to_json(const ObstructionInstance& inst) {
  Json j;
  j["d"] = inst.d;
  j["n"] = inst.n;
  j["k"] = inst.k;
  j["epsilon"] = inst.epsilon;
  j["samples_per_region"] = inst.samples_per_region;
  j["seed"] = inst.seed;
  j["grid_side"] = inst.grid.s;
  j["grid_levels"] = inst.grid.levels;
  j["label_table"] = inst.chi.tuples;
  j["cover_vertices"] = inst.cover.vertices;
  j["min_region_margin"] = inst.min_region_margin;
  j["e_plus"] = inst.e_plus;
  j["e_minus"] = inst.e_minus;
  j["sample_region"] = inst.sample_region;
  j["directions"] = inst.directions;
  return j;
}

ObstructionInstance instance_from_json(const Json& j) {
  for (const char* key :
       {"d", "n", "k", "epsilon", "samples_per_region", "seed", "e_plus",
        "e_minus", "sample_region", "directions", "min_region_margin"}) {
    require_key(j, key);
  }
  const int d = j.at("d").get<int>();
  const int n = j.at("n").get<int>();
  const int k = j.at("k").get<int>();
  const double eps = j.at("epsilon").get<double>();
  // Grid, label table, and cover are deterministic in (d, n, k); rebuild them
  // and take only the sampled rows from the file.
  ObstructionInstance inst;
  inst.d = d;
  inst.n = n;
  inst.k = k;
  inst.epsilon = eps;
  inst.samples_per_region = j.at("samples_per_region").get<int>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.grid = build_grid(d, n, k);
  inst.axis = build_axis_set(inst.grid);
  inst.chi = build_injection(inst.grid);
  inst.cover = regular_simplex(d * (n - k));
  inst.delta = make_delta_map(d, n, k, eps);
  inst.min_region_margin = j.at("min_region_margin").get<double>();
  inst.e_plus = doubles_from(j, "e_plus");
  inst.e_minus = doubles_from(j, "e_minus");
  inst.sample_region = j.at("sample_region").get<std::vector<int>>();
  inst.directions = doubles_from(j, "directions");
  const std::size_t rows = inst.sample_region.size();
  if (inst.e_plus.size() != rows * inst.point_dim() ||
      inst.e_minus.size() != rows * inst.point_dim() ||
      inst.directions.size() != rows * static_cast<std::size_t>(d * (n - k))) {
    throw std::invalid_argument("instance sample arrays have mismatched sizes");
  }
  return inst;
}

Json propagation_to_json(const GridPropagationReport& rep) {
  Json j;
  j["axis_deviation"] = rep.axis_deviation;
  j["grid_deviation"] = rep.grid_deviation;
  j["amplification"] = rep.amplification;
  j["tolerance"] = rep.tolerance;
  j["precondition_ok"] = rep.precondition_ok;
  j["passed"] = rep.passed;
  return j;
}

GridPropagationReport propagation_from_json(const Json& j) {
  GridPropagationReport rep;
  rep.axis_deviation = j.at("axis_deviation").get<double>();
  rep.grid_deviation = j.at("grid_deviation").get<double>();
  rep.amplification = j.at("amplification").get<double>();
  rep.tolerance = j.at("tolerance").get<double>();
  rep.precondition_ok = j.at("precondition_ok").get<bool>();
  rep.passed = j.at("passed").get<bool>();
  return rep;
}

Json certificate_to_json(const CollisionCertificate& cert,
                         const EncoderSpec& enc) {
  if (encoder_fingerprint(enc) != cert.encoder_hash) {
    throw std::invalid_argument(
        "certificate was not produced by the supplied encoder");
  }
  Json j;
  j["format"] = "poolbound-certificate";
  j["version"] = 1;
  j["d"] = cert.d;
  j["n"] = cert.n;
  j["k"] = cert.k;
  j["latent_dim"] = cert.latent_dim;
  j["epsilon"] = cert.epsilon;
  j["instance_seed"] = cert.instance_seed;
  j["samples_per_region"] = cert.samples_per_region;
  j["method"] = cert.method;
  j["u_star"] = cert.u_star;
  j["region"] = cert.region;
  j["x_plus"] = cert.x_plus;
  j["x_minus"] = cert.x_minus;
  j["residual"] = cert.residual;
  j["axis_residual"] = cert.axis_residual;
  j["grid_residual"] = cert.grid_residual;
  j["grid_max_residual"] = cert.grid_max_residual;
  j["propagation"] = propagation_to_json(cert.propagation);
  j["restarts_used"] = cert.restarts_used;
  j["iterations_used"] = cert.iterations_used;
  j["encoder_hash"] = cert.encoder_hash;
  j["encoder"] = encoder_to_json(enc);
  return j;
}

CollisionCertificate certificate_from_json(const Json& j) {
  for (const char* key :
       {"d", "n", "k", "latent_dim", "epsilon", "instance_seed",
        "samples_per_region", "method", "u_star", "region", "x_plus",
        "x_minus", "residual", "axis_residual", "grid_residual",
        "grid_max_residual", "propagation", "encoder_hash"}) {
    require_key(j, key);
  }
  CollisionCertificate cert;
  cert.d = j.at("d").get<int>();
  cert.n = j.at("n").get<int>();
  cert.k = j.at("k").get<int>();
  cert.latent_dim = j.at("latent_dim").get<int>();
  cert.epsilon = j.at("epsilon").get<double>();
  cert.instance_seed = j.at("instance_seed").get<std::uint64_t>();
  cert.samples_per_region = j.at("samples_per_region").get<int>();
  cert.method = j.at("method").get<std::string>();
  cert.u_star = doubles_from(j, "u_star");
  cert.region = j.at("region").get<int>();
  cert.x_plus = doubles_from(j, "x_plus");
  cert.x_minus = doubles_from(j, "x_minus");
  cert.residual = j.at("residual").get<double>();
  cert.axis_residual = j.at("axis_residual").get<double>();
  cert.grid_residual = j.at("grid_residual").get<double>();
  cert.grid_max_residual = j.at("grid_max_residual").get<double>();
  cert.propagation = propagation_from_json(j.at("propagation"));
  cert.restarts_used = j.value("restarts_used", 0);
  cert.iterations_used = j.value("iterations_used", 0LL);
  cert.encoder_hash = j.at("encoder_hash").get<std::string>();
  return cert;
}

EncoderSpec certificate_encoder(const Json& j) {
  require_key(j, "encoder");
  return encoder_from_json(j.at("encoder"));
}

Json gap_to_json(const GapReport& rep, const EncoderSpec& enc) {
  Json j;
  j["g_plus"] = rep.g_plus;
  j["g_minus"] = rep.g_minus;
  j["f_plus"] = rep.f_plus;
  j["f_minus"] = rep.f_minus;
  j["model_gap"] = rep.model_gap;
  j["implied_bound"] = rep.implied_bound;
  j["certificate"] = certificate_to_json(rep.certificate, enc);
  return j;
}

GapReport gap_from_json(const Json& j) {
  for (const char* key : {"g_plus", "g_minus", "f_plus", "f_minus",
                          "model_gap", "implied_bound", "certificate"}) {
    require_key(j, key);
  }
  GapReport rep;
  rep.g_plus = j.at("g_plus").get<double>();
  rep.g_minus = j.at("g_minus").get<double>();
  rep.f_plus = j.at("f_plus").get<double>();
  rep.f_minus = j.at("f_minus").get<double>();
  rep.model_gap = j.at("model_gap").get<double>();
  rep.implied_bound = j.at("implied_bound").get<double>();
  rep.certificate = certificate_from_json(j.at("certificate"));
  return rep;
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return Json::parse(in);
}

VerifyReport verify_certificate(const Json& doc, double tolerance) {
  VerifyReport rep;
  CollisionCertificate stored = certificate_from_json(doc);
  EncoderSpec enc = certificate_encoder(doc);

  rep.hash_ok = encoder_fingerprint(enc) == stored.encoder_hash;
  if (!rep.hash_ok) {
    rep.message = "encoder hash mismatch";
    return rep;
  }

  ObstructionInstance inst =
      sample_obstruction(stored.d, stored.n, stored.k, stored.epsilon,
                         stored.samples_per_region, stored.instance_seed);
  BorsukUlamMap map(enc, inst);
  if (stored.u_star.size() != static_cast<std::size_t>(map.sphere_dim())) {
    rep.message = "direction has wrong dimension";
    return rep;
  }
  double norm_sq = kern::nrm2sq(stored.u_star.data(), stored.u_star.size());
  rep.unit_ok = std::abs(std::sqrt(norm_sq) - 1.0) <= 1e-12;
  if (!rep.unit_ok) {
    rep.message = "direction is not unit length";
    return rep;
  }

  SphereDirection u = make_direction(map.sphere_dim(), stored.u_star);
  CollisionCertificate fresh = make_certificate(
      map, u, stored.method, stored.restarts_used, stored.iterations_used);

  rep.region_ok = fresh.region == stored.region;
  rep.points_ok = fresh.x_plus == stored.x_plus && fresh.x_minus == stored.x_minus;

  double err = std::abs(fresh.residual - stored.residual);
  err = std::max(err, std::abs(fresh.axis_residual - stored.axis_residual));
  err = std::max(err, std::abs(fresh.grid_residual - stored.grid_residual));
  err = std::max(err,
                 std::abs(fresh.grid_max_residual - stored.grid_max_residual));
  rep.max_residual_error = err;
  rep.residual_ok = err <= tolerance;
  rep.propagation_ok = fresh.propagation.passed;

  rep.passed = rep.hash_ok && rep.unit_ok && rep.region_ok && rep.points_ok &&
               rep.residual_ok && rep.propagation_ok;
  if (!rep.passed && rep.message.empty()) {
    if (!rep.region_ok) rep.message = "region assignment changed";
    else if (!rep.points_ok) rep.message = "certified points do not reconstruct";
    else if (!rep.residual_ok) rep.message = "residuals drifted past tolerance";
    else rep.message = "propagation check failed";
  }
  return rep;
}

}  // namespace poolbound
