#include "poolbound/collision.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "poolbound/kernels.hpp"

namespace poolbound {

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;

  void byte(unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const char* s) {
    while (*s) byte(static_cast<unsigned char>(*s++));
  }
};

std::vector<double> delta_minus(const DeltaMap& map, const SphereDirection& u) {
  return delta_embed(map, u, -1);
}

double axis_deviation_max(const EncoderSpec& enc,
                          const ObstructionInstance& inst,
                          const std::vector<double>& tail_u,
                          const std::vector<double>& tail_v) {
  double worst = 0.0;
  for (const std::vector<int>& tuple : inst.axis.tuples) {
    const std::vector<double> base = inst.grid.tuple_coords(tuple);
    const std::vector<double> a =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_u));
    const std::vector<double> b =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_v));
    worst = std::max(worst, std::sqrt(kern::sqdist(a.data(), b.data(), a.size())));
  }
  return worst;
}

}  // namespace

BorsukUlamMap::BorsukUlamMap(const EncoderSpec& enc,
                             const ObstructionInstance& inst)
    : encoder(&enc), instance(&inst) {
  if (enc.d != inst.d || enc.n != inst.n || enc.k != inst.k) {
    throw std::invalid_argument("BorsukUlamMap: encoder/instance mismatch");
  }
}

int BorsukUlamMap::sphere_dim() const { return instance->delta.tail_dim(); }

int BorsukUlamMap::output_dim() const {
  return encoder->latent_dim * static_cast<int>(instance->axis.tuples.size());
}

std::vector<double> bu_map_eval(const BorsukUlamMap& map,
                                const SphereDirection& u) {
  if (u.b != map.sphere_dim()) {
    throw std::invalid_argument("bu_map_eval: direction dimension mismatch");
  }
  const EncoderSpec& enc = *map.encoder;
  const ObstructionInstance& inst = *map.instance;
  const std::vector<double> tail = delta_embed(inst.delta, u, +1);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(map.output_dim()));
  for (const std::vector<int>& tuple : inst.axis.tuples) {
    const std::vector<double> base = inst.grid.tuple_coords(tuple);
    const std::vector<double> latent =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail));
    out.insert(out.end(), latent.begin(), latent.end());
  }
  return out;
}

double antipodal_residual(const BorsukUlamMap& map, const SphereDirection& u) {
  const std::vector<double> fp = bu_map_eval(map, u);
  const std::vector<double> fm = bu_map_eval(map, negate(u));
  return kern::sqdist(fp.data(), fm.data(), fp.size());
}

std::vector<double> antipodal_residual_gradient(const BorsukUlamMap& map,
                                                const SphereDirection& u) {
  const EncoderSpec& enc = *map.encoder;
  const ObstructionInstance& inst = *map.instance;
  const int b = map.sphere_dim();
  const int latent = enc.latent_dim;
  const std::size_t tail_off = static_cast<std::size_t>(enc.k) * enc.d;

  const std::vector<double> tail_p = delta_embed(inst.delta, u, +1);
  const std::vector<double> tail_m = delta_minus(inst.delta, u);

  std::vector<double> grad(static_cast<std::size_t>(b), 0.0);
  std::vector<double> cot(static_cast<std::size_t>(latent));
  for (const std::vector<int>& tuple : inst.axis.tuples) {
    const std::vector<double> base = inst.grid.tuple_coords(tuple);
    const PointConfig cfg_p =
        assemble_config(enc.d, enc.n, enc.k, base, tail_p);
    const PointConfig cfg_m =
        assemble_config(enc.d, enc.n, enc.k, base, tail_m);
    const std::vector<double> fp = encode(enc, cfg_p);
    const std::vector<double> fm = encode(enc, cfg_m);
    for (int c = 0; c < latent; ++c) cot[c] = 2.0 * (fp[c] - fm[c]);
    const std::vector<double> gp = encode_input_vjp(enc, cfg_p, cot);
    const std::vector<double> gm = encode_input_vjp(enc, cfg_m, cot);
    for (int t = 0; t < b; ++t) {
      grad[t] += inst.epsilon * (gp[tail_off + t] + gm[tail_off + t]);
    }
  }
  return grad;
}

CollisionCertificate make_certificate(const BorsukUlamMap& map,
                                      const SphereDirection& u,
                                      const std::string& method,
                                      int restarts_used,
                                      long long iterations_used) {
  const EncoderSpec& enc = *map.encoder;
  const ObstructionInstance& inst = *map.instance;

  CollisionCertificate cert;
  cert.d = enc.d;
  cert.n = enc.n;
  cert.k = enc.k;
  cert.latent_dim = enc.latent_dim;
  cert.epsilon = inst.epsilon;
  cert.instance_seed = inst.seed;
  cert.samples_per_region = inst.samples_per_region;
  cert.method = method;
  cert.u_star = u.coords;
  cert.restarts_used = restarts_used;
  cert.iterations_used = iterations_used;
  cert.encoder_hash = encoder_fingerprint(enc);

  cert.region = assign_region(inst.cover, u);
  const std::vector<double> base =
      inst.grid.tuple_coords(inst.chi.tuples[cert.region - 1]);
  const std::vector<double> tail_p = delta_embed(inst.delta, u, +1);
  const std::vector<double> tail_m = delta_embed(inst.delta, u, -1);
  cert.x_plus = assemble_config(enc.d, enc.n, enc.k, base, tail_p).coords;
  cert.x_minus = assemble_config(enc.d, enc.n, enc.k, base, tail_m).coords;

  cert.residual = antipodal_residual(map, u);
  cert.axis_residual = axis_deviation_max(enc, inst, tail_p, tail_m);
  {
    const std::vector<double> a =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_p));
    const std::vector<double> b =
        encode(enc, assemble_config(enc.d, enc.n, enc.k, base, tail_m));
    cert.grid_residual = std::sqrt(kern::sqdist(a.data(), b.data(), a.size()));
  }
  cert.propagation = check_axes_to_grid(
      enc, inst.grid, inst.axis, tail_p, tail_m,
      std::max(cert.axis_residual, kPropagationFloor));
  cert.grid_max_residual = cert.propagation.grid_deviation;
  return cert;
}

SearchOutcome find_collision(const BorsukUlamMap& map,
                             const SearchConfig& config) {
  if (config.restarts < 1 || config.max_iterations < 1 ||
      config.step_size <= 0.0 || config.tolerance <= 0.0) {
    throw std::invalid_argument("find_collision: bad search config");
  }
  const int b = map.sphere_dim();

  SearchOutcome outcome;
  outcome.best_residual = std::numeric_limits<double>::infinity();
  long long iterations = 0;

  for (int restart = 0; restart < config.restarts; ++restart) {
    Rng rng(derive_seed(config.seed, "collision-restart",
                        static_cast<std::uint64_t>(restart)));
    SphereDirection u = sample_one_direction(b, rng);
    double resid = antipodal_residual(map, u);
    double step = config.step_size;

    for (int iter = 0; iter < config.max_iterations && resid > config.tolerance;
         ++iter) {
      ++iterations;
      const std::vector<double> g = antipodal_residual_gradient(map, u);
      const double gu = kern::dot(g.data(), u.coords.data(), g.size());
      std::vector<double> tangent(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        tangent[i] = g[i] - gu * u.coords[i];
      }
      const double tangent_norm = std::sqrt(kern::nrm2sq(tangent.data(), tangent.size()));
      if (tangent_norm <= 1e-18 * (1.0 + std::abs(resid))) break;

      // The step carries over and first tries to grow, so progress per
      // iteration stays geometric whatever the local curvature scale.
      bool improved = false;
      for (double trial = step * 4.0;
           trial >= step * 0x1p-40 && trial >= 1e-18; trial *= 0.5) {
        std::vector<double> cand(u.coords.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
          cand[i] = u.coords[i] - trial * tangent[i];
        }
        const double norm = std::sqrt(kern::nrm2sq(cand.data(), cand.size()));
        if (norm < 1e-12) continue;
        for (double& c : cand) c /= norm;
        SphereDirection next;
        next.b = b;
        next.coords = std::move(cand);
        const double cand_resid = antipodal_residual(map, next);
        if (cand_resid < resid) {
          u = std::move(next);
          resid = cand_resid;
          step = trial;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }

    if (resid < outcome.best_residual) {
      outcome.best_residual = resid;
      outcome.best_u = u.coords;
    }

    if (resid <= config.tolerance) {
      CollisionCertificate cert =
          make_certificate(map, u, "search", restart + 1, iterations);
      if (cert.propagation.passed) {
        outcome.certified = true;
        outcome.certificate = std::move(cert);
        outcome.restarts_used = restart + 1;
        outcome.iterations_used = iterations;
        outcome.message = "collision certified";
        return outcome;
      }
      outcome.message = "propagation check failed at a candidate";
    }
  }

  outcome.restarts_used = config.restarts;
  outcome.iterations_used = iterations;
  if (outcome.message.empty()) {
    outcome.message = "no direction reached the residual tolerance";
  }
  return outcome;
}

std::optional<std::vector<double>> nullspace_vector(std::vector<double> mat,
                                                    std::size_t rows,
                                                    std::size_t cols) {
  if (cols == 0 || mat.size() != rows * cols) {
    throw std::invalid_argument("nullspace_vector: shape mismatch");
  }
  double maxabs = 0.0;
  for (double v : mat) maxabs = std::max(maxabs, std::abs(v));
  const double tol = 1e-10 * maxabs;

  std::vector<std::size_t> pivot_cols;
  std::vector<std::size_t> pivot_rows;
  std::size_t pr = 0;
  for (std::size_t col = 0; col < cols && pr < rows; ++col) {
    std::size_t best = pr;
    double best_abs = std::abs(mat[pr * cols + col]);
    for (std::size_t r = pr + 1; r < rows; ++r) {
      const double a = std::abs(mat[r * cols + col]);
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs <= tol) continue;
    if (best != pr) {
      for (std::size_t c = 0; c < cols; ++c) {
        std::swap(mat[pr * cols + c], mat[best * cols + c]);
      }
    }
    const double pivot = mat[pr * cols + col];
    for (std::size_t r = pr + 1; r < rows; ++r) {
      const double factor = mat[r * cols + col] / pivot;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < cols; ++c) {
        mat[r * cols + c] -= factor * mat[pr * cols + c];
      }
    }
    pivot_cols.push_back(col);
    pivot_rows.push_back(pr);
    ++pr;
  }

  if (pivot_cols.size() == cols) return std::nullopt;

  std::size_t free_col = 0;
  while (std::find(pivot_cols.begin(), pivot_cols.end(), free_col) !=
         pivot_cols.end()) {
    ++free_col;
  }

  std::vector<double> x(cols, 0.0);
  x[free_col] = 1.0;
  for (std::size_t i = pivot_cols.size(); i-- > 0;) {
    const std::size_t row = pivot_rows[i];
    const std::size_t pc = pivot_cols[i];
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != pc) s += mat[row * cols + c] * x[c];
    }
    x[pc] = -s / mat[row * cols + pc];
  }
  const double norm = std::sqrt(kern::nrm2sq(x.data(), x.size()));
  for (double& v : x) v /= norm;
  return x;
}

std::optional<CollisionCertificate> linear_collision_oracle(
    const BorsukUlamMap& map) {
  for (const Mlp& m : map.encoder->members) {
    if (!is_affine(m)) {
      throw std::invalid_argument(
          "linear_collision_oracle: encoder member is not affine");
    }
  }
  const std::size_t b = static_cast<std::size_t>(map.sphere_dim());
  const std::size_t m = static_cast<std::size_t>(map.output_dim());

  // Column j of L is (F(e_j) - F(-e_j)) / 2; affine members make F(u)-F(-u)
  // exactly linear in u.
  std::vector<double> L(m * b, 0.0);
  std::vector<double> basis(b, 0.0);
  for (std::size_t j = 0; j < b; ++j) {
    basis[j] = 1.0;
    const SphereDirection ej = make_direction(static_cast<int>(b), basis);
    const std::vector<double> fp = bu_map_eval(map, ej);
    const std::vector<double> fm = bu_map_eval(map, negate(ej));
    for (std::size_t r = 0; r < m; ++r) {
      L[r * b + j] = 0.5 * (fp[r] - fm[r]);
    }
    basis[j] = 0.0;
  }

  const auto null = nullspace_vector(std::move(L), m, b);
  if (!null.has_value()) return std::nullopt;
  const SphereDirection u = normalize_direction(static_cast<int>(b), *null);
  return make_certificate(map, u, "linear_oracle", 0, 0);
}

std::string encoder_fingerprint(const EncoderSpec& enc) {
  Fnv1a h;
  h.str(encoder_kind_name(enc.kind));
  h.u64(static_cast<std::uint64_t>(enc.d));
  h.u64(static_cast<std::uint64_t>(enc.n));
  h.u64(static_cast<std::uint64_t>(enc.k));
  h.u64(static_cast<std::uint64_t>(enc.latent_dim));
  for (const Mlp& m : enc.members) {
    h.str(activation_name(m.activation));
    for (std::size_t w : m.widths) h.u64(static_cast<std::uint64_t>(w));
    for (const DenseLayer& layer : m.layers) {
      for (double v : layer.weight.data) h.f64(v);
      for (double v : layer.bias.data) h.f64(v);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h.h));
  return std::string(buf);
}

GapReport gap_certificate(const Model& model, const ObstructionInstance& inst,
                          const CollisionCertificate& cert) {
  if (encoder_fingerprint(model.encoder) != cert.encoder_hash) {
    throw std::invalid_argument(
        "gap_certificate: certificate was not produced against this encoder");
  }
  if (cert.d != inst.d || cert.n != inst.n || cert.k != inst.k ||
      cert.instance_seed != inst.seed ||
      cert.epsilon != inst.epsilon) {
    throw std::invalid_argument("gap_certificate: instance mismatch");
  }
  if (cert.x_plus == cert.x_minus) {
    throw std::invalid_argument("gap_certificate: degenerate certificate");
  }
  GapReport rep;
  rep.certificate = cert;
  const PointConfig xp = make_point_config(inst.d, inst.n, cert.x_plus);
  const PointConfig xm = make_point_config(inst.d, inst.n, cert.x_minus);
  rep.g_plus = target_g(inst, xp.coords);
  rep.g_minus = target_g(inst, xm.coords);
  rep.f_plus = model_eval(model, xp);
  rep.f_minus = model_eval(model, xm);
  rep.model_gap = std::abs(rep.f_plus - rep.f_minus);
  rep.implied_bound =
      0.5 * (std::abs(rep.g_plus - rep.g_minus) - rep.model_gap);
  if (rep.implied_bound > 0.5 + 1e-9) {
    throw std::logic_error("gap_certificate: implied bound exceeds 1/2");
  }
  return rep;
}

}  // namespace poolbound
