#include "poolbound/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "poolbound/kernels.hpp"
#include "poolbound/tensor.hpp"

namespace poolbound {

std::span<const double> SimplexCover::vertex(int r) const {
  if (r < 1 || r > b + 1) {
    throw std::invalid_argument("SimplexCover::vertex: region out of range");
  }
  return std::span<const double>(vertices.data() + static_cast<std::size_t>(r - 1) * b,
                                 static_cast<std::size_t>(b));
}

namespace {

void validate_cover(const SimplexCover& cover) {
  const int b = cover.b;
  const int m = b + 1;
  if (b < 1) throw std::invalid_argument("simplex cover: b must be >= 1");
  if (cover.vertices.size() != static_cast<std::size_t>(m) * b) {
    throw std::invalid_argument("simplex cover: vertex array size mismatch");
  }
  const double target = -1.0 / static_cast<double>(b);
  for (int r = 1; r <= m; ++r) {
    const auto vr = cover.vertex(r);
    const double nn = kern::nrm2sq(vr.data(), vr.size());
    if (std::abs(std::sqrt(nn) - 1.0) > 1e-12) {
      throw std::invalid_argument("simplex cover: vertex not unit norm");
    }
    for (int q = r + 1; q <= m; ++q) {
      const auto vq = cover.vertex(q);
      const double ip = kern::dot(vr.data(), vq.data(), vr.size());
      if (std::abs(ip - target) > 1e-10) {
        throw std::invalid_argument("simplex cover: Gram entry off -1/b");
      }
    }
  }
  for (int j = 0; j < b; ++j) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += cover.vertices[static_cast<std::size_t>(r) * b + j];
    if (std::abs(s) > 1e-10) {
      throw std::invalid_argument("simplex cover: vertices do not sum to zero");
    }
  }
}

}  // namespace

SimplexCover regular_simplex(int b) {
  if (b < 1) throw std::invalid_argument("regular_simplex: b must be >= 1");
  const int m = b + 1;
  // Householder frame: with h = ones/sqrt(m) and w = h - e1, columns 2..m of
  // the reflection I - 2 w w^T / |w|^2 form an orthonormal basis of the
  // sum-zero hyperplane in R^m.
  const double h = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> w(m, h);
  w[0] -= 1.0;
  const double wtw = kern::nrm2sq(w.data(), w.size());
  const double wsum_over_m = h - 1.0 / static_cast<double>(m);  // (sum w)/m

  SimplexCover cover;
  cover.b = b;
  cover.vertices.assign(static_cast<std::size_t>(m) * b, 0.0);
  for (int r = 0; r < m; ++r) {
    // x = e_r - ones/m lies in the hyperplane; w^T x = w[r] - (sum w)/m.
    const double wx = w[r] - wsum_over_m;
    double* row = cover.vertices.data() + static_cast<std::size_t>(r) * b;
    for (int j = 1; j <= b; ++j) {
      const double xj = (j == r ? 1.0 : 0.0) - 1.0 / static_cast<double>(m);
      row[j - 1] = xj - (2.0 * w[j] / wtw) * wx;
    }
    const double norm = std::sqrt(kern::nrm2sq(row, b));
    for (int j = 0; j < b; ++j) row[j] /= norm;
  }

  // Canonical orientation: first nonzero coordinate of vertex 1 positive.
  for (int j = 0; j < b; ++j) {
    const double c = cover.vertices[j];
    if (std::abs(c) > 1e-9) {
      if (c < 0.0) {
        for (double& x : cover.vertices) x = -x;
      }
      break;
    }
  }

  validate_cover(cover);
  return cover;
}

SimplexCover simplex_cover_from_vertices(int b, std::vector<double> vertices) {
  SimplexCover cover;
  cover.b = b;
  cover.vertices = std::move(vertices);
  validate_cover(cover);
  return cover;
}

SphereDirection make_direction(int b, std::vector<double> coords) {
  if (b < 1 || coords.size() != static_cast<std::size_t>(b)) {
    throw std::invalid_argument("make_direction: dimension mismatch");
  }
  require_finite(coords, "sphere direction");
  const double norm = std::sqrt(kern::nrm2sq(coords.data(), coords.size()));
  if (std::abs(norm - 1.0) > 1e-12) {
    throw std::invalid_argument("make_direction: not unit norm");
  }
  SphereDirection u;
  u.b = b;
  u.coords = std::move(coords);
  return u;
}

SphereDirection normalize_direction(int b, std::vector<double> coords) {
  if (b < 1 || coords.size() != static_cast<std::size_t>(b)) {
    throw std::invalid_argument("normalize_direction: dimension mismatch");
  }
  require_finite(coords, "sphere direction");
  const double norm = std::sqrt(kern::nrm2sq(coords.data(), coords.size()));
  if (norm < 1e-14) {
    throw std::invalid_argument("normalize_direction: near-zero vector");
  }
  for (double& c : coords) c /= norm;
  SphereDirection u;
  u.b = b;
  u.coords = std::move(coords);
  return u;
}

SphereDirection negate(const SphereDirection& u) {
  SphereDirection v;
  v.b = u.b;
  v.coords.resize(u.coords.size());
  for (std::size_t i = 0; i < u.coords.size(); ++i) v.coords[i] = -u.coords[i];
  return v;
}

int assign_region(const SimplexCover& cover, const SphereDirection& u) {
  if (u.b != cover.b) {
    throw std::invalid_argument("assign_region: dimension mismatch");
  }
  int best_r = 1;
  double best = kern::dot(cover.vertex(1).data(), u.coords.data(), cover.b);
  for (int r = 2; r <= cover.b + 1; ++r) {
    const double ip = kern::dot(cover.vertex(r).data(), u.coords.data(), cover.b);
    if (ip > best) {
      best = ip;
      best_r = r;
    }
  }
  return best_r;
}

bool antipodal_free_violation(const SimplexCover& cover,
                              const SphereDirection& u) {
  if (u.b != cover.b) {
    throw std::invalid_argument("antipodal_free_violation: dimension mismatch");
  }
  const SphereDirection nu = negate(u);
  const int m = cover.b + 1;
  std::vector<double> ip_u(m), ip_nu(m);
  double max_u = -2.0, max_nu = -2.0;
  for (int r = 0; r < m; ++r) {
    ip_u[r] = kern::dot(cover.vertex(r + 1).data(), u.coords.data(), cover.b);
    ip_nu[r] = kern::dot(cover.vertex(r + 1).data(), nu.coords.data(), cover.b);
    if (ip_u[r] > max_u) max_u = ip_u[r];
    if (ip_nu[r] > max_nu) max_nu = ip_nu[r];
  }
  for (int r = 0; r < m; ++r) {
    if (ip_u[r] == max_u && ip_nu[r] == max_nu) return true;
  }
  return false;
}

DeltaMap make_delta_map(int d, int n, int k, double epsilon) {
  if (d < 1 || n < 2 || k < 1 || k >= n) {
    throw std::invalid_argument("make_delta_map: need d>=1, n>=2, 1<=k<n");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("make_delta_map: epsilon must be in (0, 1/2)");
  }
  DeltaMap m;
  m.d = d;
  m.n = n;
  m.k = k;
  m.epsilon = epsilon;
  return m;
}

std::vector<double> delta_embed(const DeltaMap& map, const SphereDirection& u,
                                int sign) {
  if (u.b != map.tail_dim()) {
    throw std::invalid_argument("delta_embed: dimension mismatch");
  }
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("delta_embed: sign must be +-1");
  }
  std::vector<double> out(u.coords.size());
  const double s = sign > 0 ? map.epsilon : -map.epsilon;
  for (std::size_t i = 0; i < u.coords.size(); ++i) {
    out[i] = 0.5 + s * u.coords[i];
  }
  return out;
}

SphereDirection sample_one_direction(int b, Rng& rng) {
  if (b < 1) throw std::invalid_argument("sample_one_direction: b must be >= 1");
  std::vector<double> v(b);
  while (true) {
    for (double& x : v) x = rng.normal();
    const double norm = std::sqrt(kern::nrm2sq(v.data(), v.size()));
    if (norm > 1e-8) {
      for (double& x : v) x /= norm;
      SphereDirection u;
      u.b = b;
      u.coords = v;
      return u;
    }
  }
}

std::vector<SphereDirection> sample_sphere(int b, int count,
                                           std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample_sphere: negative count");
  Rng rng(seed);
  std::vector<SphereDirection> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_one_direction(b, rng));
  return out;
}

}  // namespace poolbound
