#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poolbound/architectures.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/geometry.hpp"
#include "poolbound/rigidity.hpp"

namespace poolbound {

// F(u) = concatenation over axis tuples x_b of encode(x_b, delta(u)); an
// antipodal coincidence F(u) = F(-u) is a latent collision between a point
// of E+ and its mirror in E-.
struct BorsukUlamMap {
  const EncoderSpec* encoder = nullptr;
  const ObstructionInstance* instance = nullptr;

  BorsukUlamMap(const EncoderSpec& enc, const ObstructionInstance& inst);

  int sphere_dim() const;  // d(n-k)
  int output_dim() const;  // latent_dim * |axis|
};

std::vector<double> bu_map_eval(const BorsukUlamMap& map,
                                const SphereDirection& u);

// Squared norm of F(u) - F(-u).
double antipodal_residual(const BorsukUlamMap& map, const SphereDirection& u);

// Ambient gradient of the residual with respect to u (callers project onto
// the tangent space).
std::vector<double> antipodal_residual_gradient(const BorsukUlamMap& map,
                                                const SphereDirection& u);

struct SearchConfig {
  int restarts = 100;
  int max_iterations = 500;
  double step_size = 0.1;
  double tolerance = 1e-10;  // on the squared residual
  std::uint64_t seed = 0;
};

// Floating-point allowance in the axes-to-grid certification check; the
// telescoping bound is exact in real arithmetic only.
inline constexpr double kPropagationFloor = 1e-13;

struct CollisionCertificate {
  int d = 0;
  int n = 0;
  int k = 0;
  int latent_dim = 0;
  double epsilon = 0.25;
  std::uint64_t instance_seed = 0;
  int samples_per_region = 0;
  std::string method;  // "search" or "linear_oracle"

  std::vector<double> u_star;
  int region = 0;
  std::vector<double> x_plus;   // (chi(region), delta(u*))
  std::vector<double> x_minus;  // (chi(region), delta(-u*))

  double residual = 0.0;           // squared norm of F(u*) - F(-u*)
  double axis_residual = 0.0;      // max latent diff 2-norm over axis tuples
  double grid_residual = 0.0;      // latent diff 2-norm at chi(region)
  double grid_max_residual = 0.0;  // max over the full grid
  GridPropagationReport propagation;

  int restarts_used = 0;
  long long iterations_used = 0;
  std::string encoder_hash;
};

// Region assignment, reconstruction of x+/x-, residual recomputation, and the
// axes-to-grid propagation check for a candidate direction.
CollisionCertificate make_certificate(const BorsukUlamMap& map,
                                      const SphereDirection& u,
                                      const std::string& method,
                                      int restarts_used,
                                      long long iterations_used);

struct SearchOutcome {
  bool certified = false;
  CollisionCertificate certificate;
  double best_residual = 0.0;
  std::vector<double> best_u;
  int restarts_used = 0;
  long long iterations_used = 0;
  std::string message;
};

// Multi-start projected gradient descent with halving line search. Succeeds
// when the squared residual reaches config.tolerance and the certification
// checks pass.
SearchOutcome find_collision(const BorsukUlamMap& map,
                             const SearchConfig& config);

// For encoders whose members are all affine, F(u) - F(-u) = 2 L u exactly;
// returns a certificate built from a unit nullspace vector of L, or nothing
// when L has full column rank. Throws if a member is not affine.
std::optional<CollisionCertificate> linear_collision_oracle(
    const BorsukUlamMap& map);

// First (left-to-right) unit kernel vector of a row-major rows x cols matrix
// by Gaussian elimination with partial pivoting; rank decisions at
// 1e-10 * max|entry|.
std::optional<std::vector<double>> nullspace_vector(std::vector<double> mat,
                                                    std::size_t rows,
                                                    std::size_t cols);

// FNV-1a over architecture and weight bit patterns, 16 hex digits.
std::string encoder_fingerprint(const EncoderSpec& enc);

struct GapReport {
  double g_plus = 0.0;
  double g_minus = 0.0;
  double f_plus = 0.0;
  double f_minus = 0.0;
  double model_gap = 0.0;       // |f_plus - f_minus|
  double implied_bound = 0.0;   // (|g_plus - g_minus| - model_gap) / 2
  CollisionCertificate certificate;
};

// Evaluates the target and the model at the certified pair. The certificate
// must have been produced against model.encoder (fingerprints must match).
GapReport gap_certificate(const Model& model, const ObstructionInstance& inst,
                          const CollisionCertificate& cert);

}  // namespace poolbound
