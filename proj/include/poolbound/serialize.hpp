#pragma once

#include <string>

#include "json.hpp"

#include "poolbound/architectures.hpp"
#include "poolbound/collision.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/mlp.hpp"
#include "poolbound/rigidity.hpp"

namespace poolbound {

using Json = nlohmann::json;

// Nets are stored as an architecture descriptor (widths, activation) plus the
// flat parameter list in flatten_params order. Doubles survive the JSON round
// trip bit-exactly (shortest round-trip printing, strtod parsing).
Json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

Json encoder_to_json(const EncoderSpec& enc);
EncoderSpec encoder_from_json(const Json& j);

Json model_to_json(const Model& model);
Model model_from_json(const Json& j);

// Full frozen instance: parameters, grid levels, label table, cover vertices,
// and every sampled row, so downstream checks can replay without re-sampling.
Json instance_to_json(const ObstructionInstance& inst);
ObstructionInstance instance_from_json(const Json& j);

Json propagation_to_json(const GridPropagationReport& rep);
GridPropagationReport propagation_from_json(const Json& j);

// Self-contained: embeds the full encoder next to its hash so the residuals
// can be recomputed from the file alone.
Json certificate_to_json(const CollisionCertificate& cert,
                         const EncoderSpec& enc);
CollisionCertificate certificate_from_json(const Json& j);
EncoderSpec certificate_encoder(const Json& j);

Json gap_to_json(const GapReport& rep, const EncoderSpec& enc);
GapReport gap_from_json(const Json& j);

void save_json(const Json& j, const std::string& path);
Json load_json(const std::string& path);

struct VerifyReport {
  bool hash_ok = false;
  bool unit_ok = false;
  bool region_ok = false;
  bool points_ok = false;
  bool residual_ok = false;
  bool propagation_ok = false;
  bool passed = false;
  double max_residual_error = 0.0;
  std::string message;
};

// Independent replay of a certificate file: rebuild the encoder and the
// obstruction instance from the embedded parameters and seed, recompute every
// residual at the stored direction, and compare. Points must reconstruct
// exactly; residuals must agree within `tolerance`.
VerifyReport verify_certificate(const Json& doc, double tolerance = 1e-12);

}  // namespace poolbound
