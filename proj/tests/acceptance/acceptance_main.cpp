// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// its runtime; the process exit code is the number of failures. Tolerances
// and runtime budgets are pinned here on purpose: a slower or looser build
// should fail loudly, not drift.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "poolbound/architectures.hpp"
#include "poolbound/bounds.hpp"
#include "poolbound/collision.hpp"
#include "poolbound/constructions.hpp"
#include "poolbound/experiments.hpp"
#include "poolbound/geometry.hpp"
#include "poolbound/kernels.hpp"
#include "poolbound/rigidity.hpp"
#include "poolbound/rng.hpp"
#include "poolbound/serialize.hpp"

namespace pb = poolbound;

namespace {

struct CertifiedRun {
  pb::CollisionCertificate cert;
  pb::EncoderSpec encoder;
};

std::vector<CertifiedRun> g_certified;  // collected by C5-C7, checked by C9/C10

struct Failure {
  std::string detail;
  bool failed = false;

  void fail(const char* fmt, ...) __attribute__((format(printf, 2, 3)));
};

void Failure::fail(const char* fmt, ...) {
  if (failed) return;  // keep the first failure, it is the most specific
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  detail = buf;
  failed = true;
}

long long ipow_ll(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// ---- C1: closed-form relationships across a wide parameter range ----------

void c1_bound_relationships(Failure& f) {
  for (int d = 1; d <= 8 && !f.failed; ++d) {
    for (int n = 2; n <= 64 && !f.failed; ++n) {
      const long long k1 = pb::indexed_lower_bound(d, n, 1);
      if (k1 != static_cast<long long>(d) * (n - 1)) {
        f.fail("k=1 bound at d=%d n=%d is %lld, want d(n-1)", d, n, k1);
      }
      if (pb::deepsets_lower_bound(d, n) != k1) {
        f.fail("specialized k=1 bound disagrees at d=%d n=%d", d, n);
      }
      const long long upper = (d == 1) ? n : 2LL * n * d + 1;
      if (k1 > upper) {
        f.fail("lower bound %lld exceeds catalogued upper %lld at d=%d n=%d",
               k1, upper, d, n);
      }
      if (pb::trivial_bound(d, n, 1) != 1) f.fail("trivial p=1 bound != 1");
      if (pb::trivial_bound(d, n, 1000000) !=
          static_cast<long long>(n) * d) {
        f.fail("trivial bound cap != nd at d=%d n=%d", d, n);
      }
      for (int k = 2; k < std::min(n, 5) && !f.failed; ++k) {
        const long long lower = pb::indexed_lower_bound(d, n, k);
        if (lower < 1) f.fail("bound below 1 at d=%d n=%d k=%d", d, n, k);
        const long long b = static_cast<long long>(d) * (n - k);
        if (lower > b && b > 0) {
          f.fail("bound %lld above ambient %lld at d=%d n=%d k=%d", lower, b,
                 d, n, k);
        }
      }
    }
  }
}

// ---- C2: agreement with brute-force enumeration ---------------------------

void c2_brute_force(Failure& f) {
  for (int d = 1; d <= 4 && !f.failed; ++d) {
    for (int n = 2; n <= 12 && !f.failed; ++n) {
      for (int k = 1; k < std::min(n, 5) && !f.failed; ++k) {
        const long long target = static_cast<long long>(d) * (n - k) + 1;
        int s = 1;
        while (ipow_ll(s, k) < target) ++s;
        std::vector<int> idx(k, 0);
        long long axis = 0;
        while (true) {
          if (std::find(idx.begin(), idx.end(), 0) != idx.end()) ++axis;
          int pos = k - 1;
          while (pos >= 0 && ++idx[pos] == s) idx[pos--] = 0;
          if (pos < 0) break;
        }
        const long long want = (target - 1 + axis - 1) / axis;
        if (pb::grid_side(d, n, k) != s) {
          f.fail("grid side mismatch at d=%d n=%d k=%d", d, n, k);
        }
        if (pb::axis_cardinality(d, n, k) != axis) {
          f.fail("axis count mismatch at d=%d n=%d k=%d", d, n, k);
        }
        if (pb::indexed_lower_bound(d, n, k) != want) {
          f.fail("lower bound mismatch at d=%d n=%d k=%d", d, n, k);
        }
      }
    }
  }
}

// ---- C3: tail independence of the alternating difference ------------------

void c3_rigidity(Failure& f) {
  struct Setting {
    pb::EncoderKind kind;
    int d, n, k, latent;
  };
  const std::vector<Setting> settings = {
      {pb::EncoderKind::DeepSets, 1, 3, 1, 2},
      {pb::EncoderKind::SharedJanossy, 1, 4, 2, 2},
      {pb::EncoderKind::DeepSets, 2, 3, 1, 3},
      {pb::EncoderKind::IndexedJanossy, 2, 4, 2, 2},
      {pb::EncoderKind::IndexedJanossy, 1, 5, 3, 1},
  };
  for (const Setting& st : settings) {
    if (f.failed) break;
    for (std::uint64_t e = 0; e < 20 && !f.failed; ++e) {
      const pb::EncoderSpec enc = pb::random_encoder(
          st.kind, st.d, st.n, st.k, st.latent, {8, 8}, pb::Activation::Tanh,
          pb::derive_seed(3001, "c3-enc", e * 10 + st.n));
      pb::Rng rng(pb::derive_seed(3001, "c3-tail", e * 10 + st.k));
      std::vector<double> base(st.k * st.d), inc(st.k * st.d);
      for (double& v : base) v = rng.uniform(0.0, 0.45);
      for (double& v : inc) v = rng.uniform(0.05, 0.5);
      std::vector<std::vector<double>> tails(20);
      for (auto& tail : tails) {
        tail.resize((st.n - st.k) * st.d);
        for (double& v : tail) v = rng.uniform(0.0, 1.0);
      }
      const pb::RigidityReport rep = pb::check_rigidity(
          enc, pb::make_cube_increment(st.d, st.k, base, inc), tails, 1e-9);
      if (!rep.passed) {
        f.fail("deviation %.3e > 1e-9 (kind=%d d=%d n=%d k=%d seed=%llu)",
               rep.max_deviation, static_cast<int>(st.kind), st.d, st.n, st.k,
               static_cast<unsigned long long>(e));
      }
    }
  }
  if (!f.failed) {
    // The multiplicative control must be caught.
    const pb::RigidityReport rep = pb::check_rigidity(
        pb::product_latent_map(1, 3), 1, 3, 1,
        pb::make_cube_increment(1, 1, {0.2}, {0.3}),
        {{0.9, 0.9}, {0.1, 0.1}}, 1e-9);
    if (rep.passed || rep.max_deviation <= 1e-3) {
      f.fail("non-sum control not detected (deviation %.3e)",
             rep.max_deviation);
    }
  }
}

// ---- C4: simplex covering invariants --------------------------------------

void c4_covering(Failure& f) {
  for (int b = 1; b <= 64 && !f.failed; ++b) {
    const pb::SimplexCover cover = pb::regular_simplex(b);
    for (int r = 1; r <= b + 1 && !f.failed; ++r) {
      const auto v = cover.vertex(r);
      const double norm = std::sqrt(pb::kern::nrm2sq(v.data(), v.size()));
      if (std::abs(norm - 1.0) > 1e-12) {
        f.fail("vertex norm off by %.3e at b=%d r=%d", std::abs(norm - 1.0),
               b, r);
      }
      for (int q = r + 1; q <= b + 1; ++q) {
        const double ip =
            pb::kern::dot(v.data(), cover.vertex(q).data(), v.size());
        if (std::abs(ip + 1.0 / b) > 1e-10) {
          f.fail("Gram entry off by %.3e at b=%d", std::abs(ip + 1.0 / b), b);
          break;
        }
      }
    }
  }
  for (int b : {1, 2, 3, 6, 10}) {
    if (f.failed) break;
    const pb::SimplexCover cover = pb::regular_simplex(b);
    const auto dirs =
        pb::sample_sphere(b, 100000, pb::derive_seed(3004, "c4", b));
    for (const pb::SphereDirection& u : dirs) {
      if (pb::antipodal_free_violation(cover, u)) {
        f.fail("antipodal pair inside one region at b=%d", b);
        break;
      }
    }
  }
}

// ---- C5: exact kernel directions for affine encoders ----------------------

void c5_linear_oracle(Failure& f) {
  struct Setting {
    pb::EncoderKind kind;
    int d, n, k, latent;
  };
  const std::vector<Setting> settings = {
      {pb::EncoderKind::DeepSets, 1, 3, 1, 1},
      {pb::EncoderKind::DeepSets, 2, 3, 1, 3},
      {pb::EncoderKind::SharedJanossy, 1, 4, 2, 1},
  };
  for (const Setting& st : settings) {
    if (f.failed) break;
    const pb::ObstructionInstance inst = pb::sample_obstruction(
        st.d, st.n, st.k, 0.25, 20, pb::derive_seed(3005, "c5-inst", st.n));
    for (std::uint64_t seed = 0; seed < 50 && !f.failed; ++seed) {
      const pb::EncoderSpec enc = pb::random_encoder(
          st.kind, st.d, st.n, st.k, st.latent, {}, pb::Activation::Identity,
          pb::derive_seed(3005, "c5-enc", seed * 8 + st.n));
      const pb::BorsukUlamMap map(enc, inst);
      const auto cert = pb::linear_collision_oracle(map);
      if (!cert) {
        f.fail("no kernel direction (d=%d n=%d k=%d seed=%llu)", st.d, st.n,
               st.k, static_cast<unsigned long long>(seed));
        break;
      }
      if (cert->residual > 1e-12) {
        f.fail("oracle residual %.3e > 1e-12 (d=%d n=%d k=%d)",
               cert->residual, st.d, st.n, st.k);
        break;
      }
      if (!cert->propagation.passed) {
        f.fail("oracle certificate failed propagation (d=%d n=%d k=%d)", st.d,
               st.n, st.k);
        break;
      }
      g_certified.push_back({*cert, enc});
    }
  }
}

// ---- C6: search reliability on smooth encoders ----------------------------

void c6_search(Failure& f) {
  const pb::ObstructionInstance inst =
      pb::sample_obstruction(1, 3, 1, 0.25, 50, 77);
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const pb::EncoderSpec enc = pb::random_encoder(
        pb::EncoderKind::IndexedJanossy, 1, 3, 1, 1, {16, 16},
        pb::Activation::Tanh, pb::derive_seed(3006, "c6-enc", seed));
    const pb::BorsukUlamMap map(enc, inst);
    pb::SearchConfig cfg;
    cfg.restarts = 100;
    cfg.seed = pb::derive_seed(3006, "c6-search", seed);
    const pb::SearchOutcome out = pb::find_collision(map, cfg);
    if (out.certified && out.certificate.residual <= 1e-10) {
      ++successes;
      g_certified.push_back({out.certificate, enc});
    } else if (!f.failed) {
      f.fail("search missed a forced collision (seed=%llu, best %.3e)",
             static_cast<unsigned long long>(seed), out.best_residual);
    }
  }
  std::printf("       C6 search success rate: %d/20\n", successes);
  if (successes < 20 && !f.failed) {
    f.fail("only %d/20 searches certified", successes);
  }
}

// ---- C7: trained model obeys the certified error gap ----------------------

void c7_end_to_end(Failure& f) {
  pb::TrainConfig cfg;
  cfg.d = 1;
  cfg.n = 3;
  cfg.k = 1;
  cfg.latent_dim = 1;
  cfg.kind = pb::EncoderKind::DeepSets;
  cfg.encoder_hidden = {16, 16};
  cfg.decoder_hidden = {16};
  cfg.activation = pb::Activation::Tanh;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.step_size = 0.005;
  cfg.method = pb::OptMethod::Adam;
  cfg.seed = 20260823;
  cfg.train_set = {256, 256, 256};
  cfg.epsilon = 0.25;
  cfg.samples_per_region = 40000;

  const pb::ObstructionInstance inst = pb::sample_obstruction(
      cfg.d, cfg.n, cfg.k, cfg.epsilon, cfg.samples_per_region, 424242);
  pb::Model model = pb::make_model(cfg);
  const pb::Dataset data = pb::make_dataset(inst, cfg);
  const pb::TrainReport trained = pb::train(model, data, cfg);
  if (trained.diverged) {
    f.fail("training diverged: %s", trained.message.c_str());
    return;
  }

  const pb::EncoderSpec attacked = pb::indexed_embedding(model.encoder);
  const pb::BorsukUlamMap map(attacked, inst);
  pb::SearchConfig search;
  search.restarts = 100;
  search.seed = 20260824;
  const pb::SearchOutcome out = pb::find_collision(map, search);
  if (!out.certified) {
    f.fail("attack on the trained encoder failed (best %.3e)",
           out.best_residual);
    return;
  }
  pb::Model attacked_model;
  attacked_model.encoder = attacked;
  attacked_model.decoder = model.decoder;
  const pb::GapReport gap =
      pb::gap_certificate(attacked_model, inst, out.certificate);
  const double max_err = pb::max_error_on_sampled_sets(model, inst);
  std::printf(
      "       C7 implied bound %.5f, trained max error %.5f, final loss "
      "%.5f\n",
      gap.implied_bound, max_err, trained.final_loss);
  if (gap.implied_bound < 0.499) {
    f.fail("implied error bound %.5f < 0.499", gap.implied_bound);
  }
  if (max_err < gap.implied_bound - 0.01) {
    f.fail("trained max error %.5f beats the certified bound %.5f", max_err,
           gap.implied_bound);
  }
  g_certified.push_back({out.certificate, attacked});
}

// ---- C8: labeled-copy restriction identity --------------------------------

void c8_restriction(Failure& f) {
  struct Setting {
    pb::EncoderKind kind;
    int d, n, k;
  };
  const std::vector<Setting> settings = {
      {pb::EncoderKind::DeepSets, 1, 3, 1},
      {pb::EncoderKind::DeepSets, 2, 3, 1},
      {pb::EncoderKind::SharedJanossy, 1, 4, 2},
      {pb::EncoderKind::SharedJanossy, 2, 4, 2},
  };
  for (const Setting& st : settings) {
    if (f.failed) break;
    const pb::EncoderSpec shared = pb::random_encoder(
        st.kind, st.d, st.n, st.k, 2, {8}, pb::Activation::Tanh,
        pb::derive_seed(3008, "c8-enc", st.d * 10 + st.k));
    const pb::LabeledCubes cubes = pb::build_labeled_cubes(st.d, st.n);
    const pb::EncoderSpec restricted =
        pb::restrict_to_labeled_copy(shared, cubes);
    pb::Rng rng(pb::derive_seed(3008, "c8-input", st.n));
    for (int t = 0; t < 1000 && !f.failed; ++t) {
      std::vector<double> raw(static_cast<std::size_t>(st.n) * st.d);
      for (double& v : raw) v = rng.uniform();
      std::vector<double> mapped;
      for (int slot = 0; slot < st.n; ++slot) {
        const std::vector<double> piece = pb::apply_cube_map(
            cubes, slot + 1,
            std::span<const double>(raw.data() + slot * st.d, st.d));
        mapped.insert(mapped.end(), piece.begin(), piece.end());
      }
      const std::vector<double> via_restricted = pb::encode(
          restricted, pb::make_point_config(st.d, st.n, raw));
      const std::vector<double> via_mapped =
          pb::encode(shared, pb::make_point_config(st.d, st.n, mapped));
      for (std::size_t c = 0; c < via_restricted.size(); ++c) {
        if (std::abs(via_restricted[c] - via_mapped[c]) > 1e-12) {
          f.fail("restriction identity off by %.3e (d=%d n=%d k=%d)",
                 std::abs(via_restricted[c] - via_mapped[c]), st.d, st.n,
                 st.k);
          break;
        }
      }
    }
  }
}

// ---- C9: axis-to-grid amplification on every certificate ------------------

void c9_propagation(Failure& f) {
  if (g_certified.empty()) {
    f.fail("no certificates were collected by earlier criteria");
    return;
  }
  for (const CertifiedRun& run : g_certified) {
    const pb::CollisionCertificate& cert = run.cert;
    const double tol = std::max(cert.axis_residual, pb::kPropagationFloor);
    const double limit = std::pow(2.0, cert.k) * tol;
    if (cert.grid_max_residual > limit) {
      f.fail("grid residual %.3e above 2^k * %.3e", cert.grid_max_residual,
             tol);
      return;
    }
    if (!cert.propagation.passed) {
      f.fail("stored propagation report did not pass");
      return;
    }
    if (cert.propagation.tolerance != tol) {
      f.fail("stored propagation tolerance is not max(axis, floor)");
      return;
    }
  }
}

// ---- C10: certificates re-verify from their serialized form ---------------

void c10_reverify(Failure& f) {
  if (g_certified.empty()) {
    f.fail("no certificates were collected by earlier criteria");
    return;
  }
  for (const CertifiedRun& run : g_certified) {
    const pb::Json doc =
        pb::Json::parse(pb::certificate_to_json(run.cert, run.encoder).dump());
    const pb::VerifyReport rep = pb::verify_certificate(doc, 1e-12);
    if (!rep.passed) {
      f.fail("re-verification failed: %s", rep.message.c_str());
      return;
    }
    if (rep.max_residual_error > 1e-12) {
      f.fail("re-verified residual error %.3e > 1e-12",
             rep.max_residual_error);
      return;
    }
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<void(Failure&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"closed-form bound relationships", 1.0, c1_bound_relationships},
      {"brute-force bound agreement", 10.0, c2_brute_force},
      {"alternating-difference tail independence", 60.0, c3_rigidity},
      {"simplex covering invariants", 30.0, c4_covering},
      {"affine kernel-direction oracle", 30.0, c5_linear_oracle},
      {"collision search reliability", 300.0, c6_search},
      {"trained-model error gap", 600.0, c7_end_to_end},
      {"labeled-copy restriction identity", 10.0, c8_restriction},
      {"axis-to-grid residual amplification", 10.0, c9_propagation},
      {"certificate re-verification", 60.0, c10_reverify},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    Failure f;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(f);
    } catch (const std::exception& e) {
      f.fail("unhandled exception: %s", e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!f.failed && elapsed > c.budget_seconds) {
      f.fail("runtime %.2fs exceeded the %.0fs budget", elapsed,
             c.budget_seconds);
    }
    if (f.failed) {
      ++failures;
      std::printf("[FAIL] C%zu %s (%.2fs): %s\n", i + 1, c.name, elapsed,
                  f.detail.c_str());
    } else {
      std::printf("[PASS] C%zu %s (%.2fs)\n", i + 1, c.name, elapsed);
    }
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria failed\n", failures);
  }
  return failures;
}
