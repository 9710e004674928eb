#include "poolbound/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "poolbound/kernels.hpp"
#include "poolbound/rng.hpp"

namespace poolbound {

std::span<const double> Dataset::row(std::size_t i) const {
  const std::size_t dim = static_cast<std::size_t>(n) * d;
  return {inputs.data() + i * dim, dim};
}

namespace {

void check_train_config(const TrainConfig& cfg) {
  if (cfg.d < 1 || cfg.n < 2 || cfg.k < 1 || cfg.k >= cfg.n) {
    throw std::invalid_argument("bad train config dimensions");
  }
  if (cfg.latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
  if (cfg.train_set.e_plus < 0 || cfg.train_set.e_minus < 0 ||
      cfg.train_set.background < 0 ||
      cfg.train_set.e_plus + cfg.train_set.e_minus + cfg.train_set.background ==
          0) {
    throw std::invalid_argument("training set is empty");
  }
}

void push_row(Dataset& data, std::span<const double> row, double label) {
  data.inputs.insert(data.inputs.end(), row.begin(), row.end());
  data.labels.push_back(label);
}

PointConfig config_from_row(int d, int n, std::span<const double> row) {
  return make_point_config(d, n, {row.begin(), row.end()});
}

}  // namespace

Dataset make_dataset(const ObstructionInstance& inst, const TrainConfig& cfg) {
  check_train_config(cfg);
  if (inst.d != cfg.d || inst.n != cfg.n || inst.k != cfg.k) {
    throw std::invalid_argument("instance does not match train config");
  }
  const std::size_t rows = inst.sample_count();
  if (rows == 0 && (cfg.train_set.e_plus > 0 || cfg.train_set.e_minus > 0)) {
    throw std::invalid_argument("instance has no sampled rows to draw from");
  }
  Dataset data;
  data.d = cfg.d;
  data.n = cfg.n;
  Rng rng(derive_seed(cfg.seed, "dataset"));
  for (int i = 0; i < cfg.train_set.e_plus; ++i) {
    std::size_t r = rng.index(rows);
    push_row(data, inst.e_plus_row(r), target_g(inst, inst.e_plus_row(r)));
  }
  for (int i = 0; i < cfg.train_set.e_minus; ++i) {
    std::size_t r = rng.index(rows);
    push_row(data, inst.e_minus_row(r), target_g(inst, inst.e_minus_row(r)));
  }
  std::vector<double> point(inst.point_dim());
  for (int i = 0; i < cfg.train_set.background; ++i) {
    for (double& c : point) c = rng.uniform();
    push_row(data, point, target_g(inst, point));
  }
  return data;
}

Model make_model(const TrainConfig& cfg) {
  check_train_config(cfg);
  Model model;
  model.encoder = random_encoder(cfg.kind, cfg.d, cfg.n, cfg.k, cfg.latent_dim,
                                 cfg.encoder_hidden, cfg.activation,
                                 derive_seed(cfg.seed, "encoder"));
  std::vector<std::size_t> widths;
  widths.push_back(static_cast<std::size_t>(cfg.latent_dim));
  widths.insert(widths.end(), cfg.decoder_hidden.begin(),
                cfg.decoder_hidden.end());
  widths.push_back(1);
  Rng rng(derive_seed(cfg.seed, "decoder"));
  model.decoder = make_mlp(widths, cfg.activation, rng);
  return model;
}

TrainReport train(Model& model, const Dataset& data, const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.step_size <= 0.0) {
    throw std::invalid_argument("bad training schedule");
  }
  if (data.size() == 0) throw std::invalid_argument("empty dataset");

  TrainReport report;
  std::vector<double> params = flatten_params(model);
  OptimizerState opt = cfg.method == OptMethod::Adam
                           ? OptimizerState::adam(cfg.step_size)
                           : OptimizerState::sgd(cfg.step_size);

  const std::size_t count = data.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params.size());
  std::vector<double> sample_grad(params.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", epoch));
    for (std::size_t i = count; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.index(i)]);
    }
    double epoch_sq_error = 0.0;
    for (std::size_t start = 0; start < count; start += cfg.batch_size) {
      const std::size_t stop = std::min(count, start + cfg.batch_size);
      const double batch = static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_sq_error = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        PointConfig x = config_from_row(data.d, data.n, data.row(idx));
        double value = model_param_vjp(model, x, sample_grad);
        double residual = value - data.labels[idx];
        batch_sq_error += residual * residual;
        kern::axpy(2.0 * residual / batch, sample_grad.data(), grad.data(),
                   grad.size());
      }
      if (!std::isfinite(batch_sq_error)) {
        report.diverged = true;
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "non-finite loss at epoch %d step %lld", epoch,
                      report.steps);
        report.message = buf;
        report.final_loss = std::numeric_limits<double>::quiet_NaN();
        return report;
      }
      optimizer_step(opt, params, grad);
      set_params(model, params);
      report.steps += 1;
      epoch_sq_error += batch_sq_error;
    }
    report.loss_curve.push_back(epoch_sq_error / static_cast<double>(count));
  }
  report.final_loss = report.loss_curve.back();
  return report;
}

double max_error_on_sampled_sets(const Model& model,
                                 const ObstructionInstance& inst) {
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.sample_count(); ++i) {
    auto plus = inst.e_plus_row(i);
    auto minus = inst.e_minus_row(i);
    double fp = model_eval(model, config_from_row(inst.d, inst.n, plus));
    double fm = model_eval(model, config_from_row(inst.d, inst.n, minus));
    worst = std::max(worst, std::abs(fp - 1.0));
    worst = std::max(worst, std::abs(fm));
  }
  return worst;
}

SweepResult sweep_latent_dim(const TrainConfig& base,
                             std::vector<int> latent_dims,
                             const ObstructionInstance& inst,
                             const SearchConfig& search) {
  std::sort(latent_dims.begin(), latent_dims.end());
  SweepResult result;
  for (int latent : latent_dims) {
    SweepRecord record;
    record.latent_dim = latent;
    TrainConfig cfg = base;
    cfg.latent_dim = latent;
    cfg.seed = derive_seed(base.seed, "sweep-model", latent);
    try {
      Model model = make_model(cfg);
      Dataset data = make_dataset(inst, cfg);
      TrainReport trained = train(model, data, cfg);
      record.final_loss = trained.final_loss;
      record.trained_ok = !trained.diverged;
      if (trained.diverged) {
        record.message = trained.message;
        result.records.push_back(std::move(record));
        continue;
      }
      record.max_error = max_error_on_sampled_sets(model, inst);

      EncoderSpec attacked = model.encoder.shared()
                                 ? indexed_embedding(model.encoder)
                                 : model.encoder;
      BorsukUlamMap map(attacked, inst);
      SearchConfig attack = search;
      attack.seed = derive_seed(base.seed, "sweep-attack", latent);
      SearchOutcome outcome = find_collision(map, attack);
      record.certified = outcome.certified;
      record.best_residual = outcome.best_residual;
      if (outcome.certified) {
        Model attacked_model;
        attacked_model.encoder = attacked;
        attacked_model.decoder = model.decoder;
        GapReport gap = gap_certificate(attacked_model, inst,
                                        outcome.certificate);
        record.implied_bound = gap.implied_bound;
        record.gap = std::move(gap);
        record.attacked_encoder = std::move(attacked);
      } else {
        record.message = outcome.message;
      }
    } catch (const std::exception& ex) {
      record.message = ex.what();
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "latent_dim,final_loss,max_error,certified,best_residual,implied_bound\n";
  char line[256];
  for (const SweepRecord& r : result.records) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%d,%.17g,%.17g\n",
                  r.latent_dim, r.final_loss, r.max_error, r.certified ? 1 : 0,
                  r.best_residual, r.implied_bound);
    out += line;
  }
  return out;
}

}  // namespace poolbound
