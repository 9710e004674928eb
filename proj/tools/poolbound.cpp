#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "poolbound/bounds.hpp"
#include "poolbound/collision.hpp"
#include "poolbound/experiments.hpp"
#include "poolbound/geometry.hpp"
#include "poolbound/kernels.hpp"
#include "poolbound/rigidity.hpp"
#include "poolbound/rng.hpp"
#include "poolbound/serialize.hpp"

namespace pb = poolbound;
namespace fs = std::filesystem;

namespace {

std::string default_out(const std::string& name) {
  const char* env = std::getenv("POOLBOUND_OUT_DIR");
  if (env && *env) return (fs::path(env) / name).string();
  return name;
}

// "a..b" or a bare "a".
std::pair<int, int> parse_range(const std::string& text) {
  int lo = 0, hi = 0;
  if (std::sscanf(text.c_str(), "%d..%d", &lo, &hi) == 2) {
    if (lo <= hi && lo >= 0) return {lo, hi};
  } else if (std::sscanf(text.c_str(), "%d", &lo) == 1 &&
             text == std::to_string(lo)) {
    return {lo, lo};
  }
  throw CLI::ValidationError("range", "expected A..B with A <= B, got '" +
                                          text + "'");
}

// Flags beat config-file values; config-file values beat defaults.
template <typename T>
void overlay(const pb::Json* cfg, const CLI::Option* opt, const char* key,
             T& value) {
  if (cfg && opt->count() == 0 && cfg->contains(key)) {
    value = cfg->at(key).get<T>();
  }
}

void write_text(const std::string& path, const std::string& text) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

int cmd_bounds(const std::string& d_range, const std::string& n_range,
               const std::string& k_range, const std::string& out) {
  auto [d_lo, d_hi] = parse_range(d_range);
  auto [n_lo, n_hi] = parse_range(n_range);
  auto [k_lo, k_hi] = parse_range(k_range);
  auto rows = pb::bounds_table(d_lo, d_hi, n_lo, n_hi, k_lo, k_hi);

  std::string csv = "d,n,k,lower_indexed,trivial_p1,upper_known,source\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%lld,%lld,%lld,%s\n", r.d, r.n,
                  r.k, r.lower_indexed, r.trivial_p1, r.upper_known,
                  r.upper_source.c_str());
    csv += line;
  }
  if (out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text(out, csv);
    pb::Json cfg = {{"subcommand", "bounds"},
                    {"d_range", d_range},
                    {"n_range", n_range},
                    {"k_range", k_range},
                    {"out", out},
                    {"rows", rows.size()}};
    pb::save_json(cfg, out + ".config.json");
  }
  return 0;
}

int cmd_cover_check(int b, int samples, std::uint64_t seed) {
  pb::SimplexCover cover = pb::regular_simplex(b);

  double norm_err = 0.0, gram_err = 0.0, colsum_err = 0.0;
  for (int r = 1; r <= b + 1; ++r) {
    auto vr = cover.vertex(r);
    norm_err = std::max(
        norm_err,
        std::abs(std::sqrt(pb::kern::nrm2sq(vr.data(), vr.size())) - 1.0));
    for (int q = r + 1; q <= b + 1; ++q) {
      auto vq = cover.vertex(q);
      double dot = pb::kern::dot(vr.data(), vq.data(), vr.size());
      gram_err = std::max(gram_err, std::abs(dot + 1.0 / b));
    }
  }
  for (int c = 0; c < b; ++c) {
    double sum = 0.0;
    for (int r = 1; r <= b + 1; ++r) sum += cover.vertex(r)[c];
    colsum_err = std::max(colsum_err, std::abs(sum));
  }

  long long violations = 0;
  auto dirs = pb::sample_sphere(b, samples, seed);
  for (const auto& u : dirs) {
    if (pb::antipodal_free_violation(cover, u)) ++violations;
  }

  bool passed = violations == 0 && norm_err <= 1e-12 && gram_err <= 1e-10 &&
                colsum_err <= 1e-10;
  pb::Json report = {{"subcommand", "cover-check"},
                     {"b", b},
                     {"samples", samples},
                     {"seed", seed},
                     {"violations", violations},
                     {"max_norm_error", norm_err},
                     {"max_gram_error", gram_err},
                     {"max_column_sum_error", colsum_err},
                     {"passed", passed}};
  std::printf("%s\n", report.dump(2).c_str());
  return passed ? 0 : 1;
}

pb::CubeIncrement random_increment(int d, int k, pb::Rng& rng) {
  std::vector<double> base(static_cast<std::size_t>(k) * d);
  std::vector<double> inc(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    base[i] = rng.uniform(0.0, 0.5);
    inc[i] = rng.uniform(0.05, 0.5);
  }
  return pb::make_cube_increment(d, k, std::move(base), std::move(inc));
}

std::vector<std::vector<double>> random_tails(int dim, int count,
                                              std::uint64_t seed) {
  std::vector<std::vector<double>> tails;
  for (int t = 0; t < count; ++t) {
    pb::Rng rng(pb::derive_seed(seed, "tail", t));
    std::vector<double> tail(dim);
    for (double& c : tail) c = rng.uniform();
    tails.push_back(std::move(tail));
  }
  return tails;
}

int cmd_rigidity_check(int d, int n, int k, int latent, int encoders,
                       int tails, std::uint64_t seed,
                       const std::vector<std::size_t>& hidden, double tol,
                       bool negative_control) {
  auto tail_rows = random_tails(d * (n - k), tails, seed);

  double max_dev = 0.0;
  bool passed = true;
  if (negative_control) {
    pb::Rng rng(pb::derive_seed(seed, "increment"));
    auto inc = random_increment(d, k, rng);
    auto report = pb::check_rigidity(pb::product_latent_map(d, n), d, n, k,
                                     inc, tail_rows, tol);
    max_dev = report.max_deviation;
    passed = max_dev > 1e-3;  // the control is supposed to fail
  } else {
    for (int e = 0; e < encoders; ++e) {
      auto enc = pb::random_encoder(pb::EncoderKind::SharedJanossy, d, n, k,
                                    latent, hidden, pb::Activation::Tanh,
                                    pb::derive_seed(seed, "encoder", e));
      pb::Rng rng(pb::derive_seed(seed, "increment", e));
      auto inc = random_increment(d, k, rng);
      auto report = pb::check_rigidity(enc, inc, tail_rows, tol);
      max_dev = std::max(max_dev, report.max_deviation);
      passed = passed && report.passed;
    }
  }

  pb::Json report = {{"subcommand", "rigidity-check"},
                     {"d", d},
                     {"n", n},
                     {"k", k},
                     {"latent_dim", latent},
                     {"encoders", negative_control ? 1 : encoders},
                     {"tails", tails},
                     {"seed", seed},
                     {"negative_control", negative_control},
                     {"max_deviation", max_dev},
                     {"tolerance", tol},
                     {"passed", passed}};
  std::printf("%s\n", report.dump(2).c_str());
  return passed ? 0 : 1;
}

struct CollisionFlags {
  int d = 1, n = 3, k = 1, latent = 1;
  std::string kind = "shared_janossy";
  std::string encoder_file;
  std::uint64_t random_seed = 0;
  bool have_random_seed = false;
  std::vector<std::size_t> hidden{16, 16};
  std::string activation = "tanh";
  double epsilon = 0.25;
  int samples_per_region = 100;
  std::uint64_t instance_seed = 0;
  int restarts = 100;
  int iters = 500;
  double step = 0.1;
  double tol = 1e-10;
  std::uint64_t search_seed = 0;
  std::string out;
};

int cmd_collision_verify(const std::string& path) {
  pb::Json doc = pb::load_json(path);
  pb::VerifyReport rep = pb::verify_certificate(doc);
  pb::Json out = {{"subcommand", "collision-find"},
                  {"mode", "verify"},
                  {"file", path},
                  {"hash_ok", rep.hash_ok},
                  {"unit_ok", rep.unit_ok},
                  {"region_ok", rep.region_ok},
                  {"points_ok", rep.points_ok},
                  {"residual_ok", rep.residual_ok},
                  {"propagation_ok", rep.propagation_ok},
                  {"max_residual_error", rep.max_residual_error},
                  {"passed", rep.passed},
                  {"message", rep.message}};
  std::printf("%s\n", out.dump(2).c_str());
  return rep.passed ? 0 : 1;
}

int cmd_collision_find(const CollisionFlags& f) {
  pb::EncoderSpec enc;
  if (!f.encoder_file.empty()) {
    enc = pb::encoder_from_json(pb::load_json(f.encoder_file));
  } else {
    enc = pb::random_encoder(pb::encoder_kind_from_name(f.kind), f.d, f.n, f.k,
                             f.latent, f.hidden,
                             pb::activation_from_name(f.activation),
                             f.random_seed);
  }

  pb::ObstructionInstance inst =
      pb::sample_obstruction(enc.d, enc.n, enc.k, f.epsilon,
                             f.samples_per_region, f.instance_seed);
  pb::BorsukUlamMap map(enc, inst);

  bool affine = true;
  for (const pb::Mlp& m : enc.members) affine = affine && pb::is_affine(m);
  std::optional<pb::CollisionCertificate> oracle;
  if (affine) oracle = pb::linear_collision_oracle(map);

  pb::SearchConfig cfg;
  cfg.restarts = f.restarts;
  cfg.max_iterations = f.iters;
  cfg.step_size = f.step;
  cfg.tolerance = f.tol;
  cfg.seed = f.search_seed;
  pb::SearchOutcome outcome = pb::find_collision(map, cfg);

  const pb::CollisionCertificate* best = nullptr;
  if (outcome.certified) best = &outcome.certificate;
  if (oracle && (!best || oracle->residual < best->residual)) best = &*oracle;

  pb::Json summary = {{"subcommand", "collision-find"},
                      {"d", enc.d},
                      {"n", enc.n},
                      {"k", enc.k},
                      {"latent_dim", enc.latent_dim},
                      {"encoder_hash", pb::encoder_fingerprint(enc)},
                      {"affine", affine},
                      {"oracle_certified", oracle.has_value()},
                      {"search_certified", outcome.certified},
                      {"best_residual", outcome.best_residual},
                      {"restarts_used", outcome.restarts_used},
                      {"message", outcome.message}};

  if (best) {
    std::string out = f.out.empty() ? default_out("certificate.json") : f.out;
    pb::save_json(pb::certificate_to_json(*best, enc), out);
    pb::Json cfg_json = {{"subcommand", "collision-find"},
                         {"epsilon", f.epsilon},
                         {"samples_per_region", f.samples_per_region},
                         {"instance_seed", f.instance_seed},
                         {"restarts", f.restarts},
                         {"iters", f.iters},
                         {"step", f.step},
                         {"tol", f.tol},
                         {"search_seed", f.search_seed},
                         {"encoder_file", f.encoder_file},
                         {"random_seed", f.random_seed},
                         {"out", out}};
    pb::save_json(cfg_json, out + ".config.json");
    summary["certificate_file"] = out;
    summary["method"] = best->method;
    summary["residual"] = best->residual;
  }
  std::printf("%s\n", summary.dump(2).c_str());
  return best ? 0 : 1;
}

pb::TrainConfig train_config_from_json(const pb::Json& j) {
  pb::TrainConfig cfg;
  cfg.d = j.value("d", 1);
  cfg.n = j.value("n", 3);
  cfg.k = j.value("k", 1);
  cfg.latent_dim = j.value("latent_dim", 1);
  cfg.kind = pb::encoder_kind_from_name(j.value("kind", "deep_sets"));
  cfg.encoder_hidden =
      j.value("encoder_hidden", std::vector<std::size_t>{16, 16});
  cfg.decoder_hidden = j.value("decoder_hidden", std::vector<std::size_t>{16});
  cfg.activation = pb::activation_from_name(j.value("activation", "tanh"));
  cfg.epochs = j.value("epochs", 40);
  cfg.batch_size = j.value("batch_size", 32);
  cfg.step_size = j.value("step_size", 0.005);
  cfg.method = pb::opt_method_from_name(j.value("method", "adam"));
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("train_set")) {
    const pb::Json& t = j.at("train_set");
    cfg.train_set.e_plus = t.value("e_plus", 256);
    cfg.train_set.e_minus = t.value("e_minus", 256);
    cfg.train_set.background = t.value("background", 256);
  } else {
    cfg.train_set = {256, 256, 256};
  }
  cfg.epsilon = j.value("epsilon", 0.25);
  cfg.samples_per_region = j.value("samples_per_region", 500);
  return cfg;
}

pb::Json train_config_to_json(const pb::TrainConfig& cfg) {
  return pb::Json{{"d", cfg.d},
                  {"n", cfg.n},
                  {"k", cfg.k},
                  {"latent_dim", cfg.latent_dim},
                  {"kind", pb::encoder_kind_name(cfg.kind)},
                  {"encoder_hidden", cfg.encoder_hidden},
                  {"decoder_hidden", cfg.decoder_hidden},
                  {"activation", pb::activation_name(cfg.activation)},
                  {"epochs", cfg.epochs},
                  {"batch_size", cfg.batch_size},
                  {"step_size", cfg.step_size},
                  {"method", pb::opt_method_name(cfg.method)},
                  {"seed", cfg.seed},
                  {"train_set",
                   {{"e_plus", cfg.train_set.e_plus},
                    {"e_minus", cfg.train_set.e_minus},
                    {"background", cfg.train_set.background}}},
                  {"epsilon", cfg.epsilon},
                  {"samples_per_region", cfg.samples_per_region}};
}

int cmd_train_sweep(const std::string& config_path, std::string out_dir,
                    bool force) {
  if (out_dir.empty()) out_dir = default_out("sweep");
  if (fs::exists(out_dir) && !force) {
    std::fprintf(stderr,
                 "output directory '%s' exists; pass --force to reuse\n",
                 out_dir.c_str());
    return 2;
  }

  pb::Json j = pb::load_json(config_path);
  pb::TrainConfig base = train_config_from_json(j);
  std::vector<int> latent_dims =
      j.value("latent_dims", std::vector<int>{base.latent_dim});
  std::uint64_t instance_seed =
      j.value("instance_seed", pb::derive_seed(base.seed, "instance"));

  pb::SearchConfig search;
  if (j.contains("search")) {
    const pb::Json& s = j.at("search");
    search.restarts = s.value("restarts", search.restarts);
    search.max_iterations = s.value("max_iterations", search.max_iterations);
    search.step_size = s.value("step_size", search.step_size);
    search.tolerance = s.value("tolerance", search.tolerance);
  }

  pb::ObstructionInstance inst =
      pb::sample_obstruction(base.d, base.n, base.k, base.epsilon,
                             base.samples_per_region, instance_seed);
  pb::SweepResult result =
      pb::sweep_latent_dim(base, latent_dims, inst, search);

  fs::create_directories(out_dir);
  // Flat superset of the input schema: feeding this file back through
  // --config replays the sweep exactly.
  pb::Json resolved = train_config_to_json(base);
  resolved["latent_dims"] = latent_dims;
  resolved["instance_seed"] = instance_seed;
  resolved["search"] = {{"restarts", search.restarts},
                        {"max_iterations", search.max_iterations},
                        {"step_size", search.step_size},
                        {"tolerance", search.tolerance}};
  resolved["subcommand"] = "train-sweep";
  resolved["config_file"] = config_path;
  resolved["out"] = out_dir;
  resolved["seed_splitting"] =
      "per-component seeds are splitmix64(root ^ fnv1a64(tag) ^ "
      "golden*(index+1)); tags: instance, sweep-model, sweep-attack, dataset, "
      "shuffle, encoder, decoder";
  pb::save_json(resolved, (fs::path(out_dir) / "resolved_config.json").string());
  write_text((fs::path(out_dir) / "results.csv").string(),
             pb::sweep_csv(result));

  pb::Json records = pb::Json::array();
  for (const pb::SweepRecord& r : result.records) {
    pb::Json rec = {{"latent_dim", r.latent_dim},
                    {"final_loss", r.final_loss},
                    {"max_error", r.max_error},
                    {"certified", r.certified},
                    {"best_residual", r.best_residual},
                    {"implied_bound", r.implied_bound},
                    {"trained_ok", r.trained_ok},
                    {"message", r.message}};
    if (r.gap && r.attacked_encoder) {
      rec["gap"] = pb::gap_to_json(*r.gap, *r.attacked_encoder);
    }
    records.push_back(std::move(rec));
  }
  pb::save_json(pb::Json{{"records", records}},
                (fs::path(out_dir) / "sweep.json").string());

  std::printf("wrote %zu records to %s\n", result.records.size(),
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-width lower bounds for sum-pooled set encoders"};
  app.require_subcommand(1);

  auto* bounds = app.add_subcommand(
      "bounds", "Emit the lower/upper bound table as CSV");
  std::string d_range = "1..2", n_range = "2..6", k_range = "1..2";
  std::string bounds_out;
  bounds->add_option("--d-range", d_range, "feature dims, A..B");
  bounds->add_option("--n-range", n_range, "set sizes, A..B");
  bounds->add_option("--k-range", k_range, "tuple orders, A..B");
  bounds->add_option("--out", bounds_out, "CSV path (default: stdout)");

  auto* cover = app.add_subcommand(
      "cover-check", "Validate the simplex covering invariants");
  int cover_b = 2, cover_samples = 100000;
  std::uint64_t cover_seed = 0;
  cover->add_option("--b", cover_b, "sphere ambient dimension")
      ->check(CLI::Range(1, 4096));
  cover->add_option("--samples", cover_samples, "Monte Carlo sample count");
  cover->add_option("--seed", cover_seed, "sampling seed");

  auto* rigidity = app.add_subcommand(
      "rigidity-check", "Alternating-difference tail independence");
  int rg_d = 1, rg_n = 3, rg_k = 1, rg_latent = 1, rg_encoders = 20,
      rg_tails = 20;
  std::uint64_t rg_seed = 0;
  std::vector<std::size_t> rg_hidden{8, 8};
  double rg_tol = 1e-9;
  bool rg_negative = false;
  rigidity->add_option("--d", rg_d)->required();
  rigidity->add_option("--n", rg_n)->required();
  rigidity->add_option("--k", rg_k)->required();
  rigidity->add_option("--M", rg_latent)->required();
  rigidity->add_option("--encoders", rg_encoders, "random encoders to test");
  rigidity->add_option("--tails", rg_tails, "tail configurations per encoder");
  rigidity->add_option("--seed", rg_seed);
  rigidity->add_option("--hidden", rg_hidden, "hidden widths");
  rigidity->add_option("--tol", rg_tol, "deviation tolerance");
  rigidity->add_flag("--negative-control", rg_negative,
                     "run the product-map control instead (expects failure)");

  auto* collision = app.add_subcommand(
      "collision-find", "Search for an antipodal latent collision");
  CollisionFlags cf;
  std::string verify_path, collision_config;
  collision->add_option("--config", collision_config,
                        "JSON config file (flags override)");
  auto* opt_d = collision->add_option("--d", cf.d);
  auto* opt_n = collision->add_option("--n", cf.n);
  auto* opt_k = collision->add_option("--k", cf.k);
  auto* opt_m = collision->add_option("--M", cf.latent);
  auto* opt_kind = collision->add_option("--kind", cf.kind,
                                         "deep_sets|shared_janossy|indexed_janossy");
  auto* opt_enc = collision->add_option("--encoder-file", cf.encoder_file,
                                        "JSON encoder to attack");
  auto* opt_rs =
      collision->add_option("--random-seed", cf.random_seed,
                            "build a seeded random encoder instead");
  auto* opt_hidden = collision->add_option("--hidden", cf.hidden);
  auto* opt_act = collision->add_option("--activation", cf.activation);
  auto* opt_eps = collision->add_option("--epsilon", cf.epsilon);
  auto* opt_spr =
      collision->add_option("--samples-per-region", cf.samples_per_region);
  auto* opt_iseed = collision->add_option("--instance-seed", cf.instance_seed);
  auto* opt_restarts = collision->add_option("--restarts", cf.restarts);
  auto* opt_iters = collision->add_option("--iters", cf.iters);
  auto* opt_step = collision->add_option("--step", cf.step);
  auto* opt_tol = collision->add_option("--tol", cf.tol);
  auto* opt_sseed = collision->add_option("--search-seed", cf.search_seed);
  auto* opt_out = collision->add_option("--out", cf.out, "certificate path");
  collision->add_option("--verify", verify_path,
                        "re-validate a stored certificate and exit");

  auto* sweep = app.add_subcommand(
      "train-sweep", "Train across latent widths and attack each model");
  std::string sweep_config, sweep_out;
  bool sweep_force = false;
  sweep->add_option("--config", sweep_config, "sweep JSON config")->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_flag("--force", sweep_force, "reuse an existing directory");

  try {
    app.parse(argc, argv);

    if (bounds->parsed()) {
      return cmd_bounds(d_range, n_range, k_range, bounds_out);
    }
    if (cover->parsed()) {
      return cmd_cover_check(cover_b, cover_samples, cover_seed);
    }
    if (rigidity->parsed()) {
      return cmd_rigidity_check(rg_d, rg_n, rg_k, rg_latent, rg_encoders,
                                rg_tails, rg_seed, rg_hidden, rg_tol,
                                rg_negative);
    }
    if (collision->parsed()) {
      if (!verify_path.empty()) return cmd_collision_verify(verify_path);
      if (!collision_config.empty()) {
        pb::Json cfgj = pb::load_json(collision_config);
        overlay(&cfgj, opt_d, "d", cf.d);
        overlay(&cfgj, opt_n, "n", cf.n);
        overlay(&cfgj, opt_k, "k", cf.k);
        overlay(&cfgj, opt_m, "M", cf.latent);
        overlay(&cfgj, opt_kind, "kind", cf.kind);
        overlay(&cfgj, opt_enc, "encoder_file", cf.encoder_file);
        overlay(&cfgj, opt_rs, "random_seed", cf.random_seed);
        overlay(&cfgj, opt_hidden, "hidden", cf.hidden);
        overlay(&cfgj, opt_act, "activation", cf.activation);
        overlay(&cfgj, opt_eps, "epsilon", cf.epsilon);
        overlay(&cfgj, opt_spr, "samples_per_region", cf.samples_per_region);
        overlay(&cfgj, opt_iseed, "instance_seed", cf.instance_seed);
        overlay(&cfgj, opt_restarts, "restarts", cf.restarts);
        overlay(&cfgj, opt_iters, "iters", cf.iters);
        overlay(&cfgj, opt_step, "step", cf.step);
        overlay(&cfgj, opt_tol, "tol", cf.tol);
        overlay(&cfgj, opt_sseed, "search_seed", cf.search_seed);
        overlay(&cfgj, opt_out, "out", cf.out);
      }
      if (!cf.encoder_file.empty() && opt_rs->count() > 0) {
        throw CLI::ValidationError(
            "encoder", "--encoder-file and --random-seed are exclusive");
      }
      if (cf.hidden.size() == 1 && cf.hidden[0] == 0) cf.hidden.clear();
      return cmd_collision_find(cf);
    }
    if (sweep->parsed()) {
      return cmd_train_sweep(sweep_config, sweep_out, sweep_force);
    }
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 2;
}
