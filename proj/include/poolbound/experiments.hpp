#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poolbound/architectures.hpp"
#include "poolbound/collision.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/optimizer.hpp"

namespace poolbound {

struct TrainSetSpec {
  int e_plus = 0;      // rows drawn from the instance's positive sample set
  int e_minus = 0;     // rows drawn from the negative sample set
  int background = 0;  // uniform points in the configuration cube
};

struct TrainConfig {
  int d = 0;
  int n = 0;
  int k = 0;
  int latent_dim = 0;
  EncoderKind kind = EncoderKind::DeepSets;
  std::vector<std::size_t> encoder_hidden;
  std::vector<std::size_t> decoder_hidden;
  Activation activation = Activation::Tanh;
  int epochs = 0;
  int batch_size = 0;
  double step_size = 0.0;
  OptMethod method = OptMethod::Adam;
  std::uint64_t seed = 0;
  TrainSetSpec train_set;
  double epsilon = 0.25;
  int samples_per_region = 0;
};

struct Dataset {
  int d = 0;
  int n = 0;
  std::vector<double> inputs;  // rows of n*d
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const;
};

// Labeled pairs against the instance's distance-ratio target: sampled
// positive rows carry label 1, negative rows label 0, uniform background
// points whatever the ratio evaluates to.
Dataset make_dataset(const ObstructionInstance& inst, const TrainConfig& cfg);

Model make_model(const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> loss_curve;  // per-epoch mean squared error
  double final_loss = 0.0;
  long long steps = 0;
  bool diverged = false;
  std::string message;
};

// Mini-batch MSE descent with a per-epoch seeded shuffle. Aborts (and says
// so) as soon as a batch loss stops being finite.
TrainReport train(Model& model, const Dataset& data, const TrainConfig& cfg);

// Max |model(x) - label| over every stored positive and negative row.
double max_error_on_sampled_sets(const Model& model,
                                 const ObstructionInstance& inst);

struct SweepRecord {
  int latent_dim = 0;
  double final_loss = 0.0;
  double max_error = 0.0;
  bool certified = false;
  double best_residual = 0.0;
  double implied_bound = 0.0;  // meaningful only when certified
  bool trained_ok = false;
  std::string message;
  std::optional<GapReport> gap;
  std::optional<EncoderSpec> attacked_encoder;  // indexed embedding
};

struct SweepResult {
  std::vector<SweepRecord> records;  // sorted by latent_dim
};

// Per latent dimension: train a fresh model, attack its indexed embedding
// with the collision search, and convert any certified collision into an
// error-gap record. Failures are recorded and the sweep moves on.
SweepResult sweep_latent_dim(const TrainConfig& base,
                             std::vector<int> latent_dims,
                             const ObstructionInstance& inst,
                             const SearchConfig& search);

// One row per latent dimension.
std::string sweep_csv(const SweepResult& result);

}  // namespace poolbound
