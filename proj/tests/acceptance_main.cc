// Copyright 2026 The polyprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gradient_check.h"
#include "polyprop/audit.h"
#include "polyprop/config.h"
#include "polyprop/experiments.h"
#include "polyprop/extraction.h"
#include "polyprop/metrics.h"
#include "polyprop/objective.h"
#include "polyprop/text.h"
#include "polyprop/trainer.h"
#include "test_support.h"

namespace polyprop {
namespace {

using testing::source_path;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every dataset built by this suite, for the leakage criterion.
std::vector<std::vector<PromptInstance>>& built_datasets() {
  static std::vector<std::vector<PromptInstance>> all;
  return all;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  std::string where;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto gp = testing::random_problem(seed);
    const auto r = testing::check_gradients(gp, seed, 200, 1e-4);
    checked += r.checked;
    if (r.max_rel > worst) {
      worst = r.max_rel;
      where = r.worst;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && checked == 1000 && secs <= 120,
          fmt("%.0f coords, max rel err %.2e, %.1f s", checked, worst, secs) +
              (where.empty() ? "" : " (worst " + where + ")")};
}

Outcome rho_stationarity() {
  Rng rng(2);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> l(kNumHeads), rho(kNumHeads, 0.0);
    for (double& v : l) v = std::exp(1.5 * rng.normal());
    const std::vector<char> present(kNumHeads, 1);
    for (int it = 0; it < 5000; ++it) {
      const auto g = total_loss_grad_rho(l, rho, present);
      for (int h = 0; h < kNumHeads; ++h) rho[h] -= g[h];
    }
    for (int h = 0; h < kNumHeads; ++h) worst = std::max(worst, std::fabs(std::exp(rho[h]) - l[h]));
  }
  return {worst <= 1e-6, fmt("max |sigma^2 - L| = %.2e over 10 loss vectors", worst)};
}

Outcome kde_contracts() {
  Rng rng(3);
  double worst_mean = 0, worst_clamp_excess = -1, worst_kde = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(500));
    std::vector<double> y(n);
    for (double& v : y) v = std::expm1(0.6 * rng.normal()) / 0.6;
    const HeadDensity d = HeadDensity::fit(y);
    double mean = 0;
    int clamped = 0;
    for (int i = 0; i < n; ++i) {
      mean += d.weights[i];
      clamped += kde_density(d.train, d.bandwidth, d.train[i]) < d.epsilon;
    }
    worst_mean = std::max(worst_mean, std::fabs(mean / n - 1.0));
    worst_clamp_excess =
        std::max(worst_clamp_excess, double(clamped) / n - (0.05 + 1.0 / n));
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(5);
    for (double& x : xs) x = 2 * rng.normal();
    const double h = 0.05 + rng.uniform();
    const double q = 2 * rng.normal();
    double s = 0;
    for (double x : xs) {
      const double u = (q - x) / h;
      s += std::exp(-0.5 * u * u) / std::sqrt(2 * M_PI);
    }
    worst_kde = std::max(worst_kde, std::fabs(kde_density(xs, h, q) - s / (5 * h)));
  }
  return {worst_mean <= 1e-9 && worst_clamp_excess <= 0 && worst_kde <= 1e-12,
          fmt("|mean w - 1| %.1e, clamp excess %.3f, kde err %.1e", worst_mean,
              worst_clamp_excess, worst_kde)};
}

Outcome extraction_audit() {
  const auto ex = extract_document(read_file(source_path("tests/fixtures/audit_docs.txt")));
  const auto gold = parse_gold(read_file(source_path("tests/fixtures/audit_gold.tsv")));
  const AuditReport r = audit(ex.observations, gold);
  built_datasets().push_back(build_dataset(ex, {}));
  const bool ok = r.n == 120 && r.sample_assoc_correct == 120 && r.property_correct == 109 &&
                  r.value_correct == 113 && r.unit_correct == 113 && r.strict_correct == 101;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sample %d, property %d, value %d, unit %d, strict %d of %d (%.3f)",
                r.sample_assoc_correct, r.property_correct, r.value_correct, r.unit_correct,
                r.strict_correct, r.n, r.strict_precision());
  return {ok, buf};
}

AblationOptions ablation_options(const std::string& file) {
  return AblationOptions::from_config(KeyValueConfig::load(source_path(file)));
}

Outcome ablation_directionality() {
  const auto t0 = std::chrono::steady_clock::now();
  const AblationReport with = run_ablation(ablation_options("configs/ablation.cfg"));
  const AblationReport null = run_ablation(ablation_options("configs/ablation_null.cfg"));
  const double secs = seconds_since(t0);
  double worst_head = -1e9;
  for (const auto& h : with.heads) worst_head = std::max(worst_head, h.delta);
  const bool ok = with.mean_delta <= -0.03 && worst_head <= 0.0 &&
                  std::fabs(null.mean_delta) <= 0.02 && with.heads.size() == 8 &&
                  with.runs.size() == 3 && secs <= 1200;
  return {ok, fmt("gamma=0.5 mean delta %.3f (max head %.3f); gamma=0 mean delta %.3f; %.0f s",
                  with.mean_delta, worst_head, null.mean_delta, secs)};
}

struct UncertaintySummary {
  double spearman_eta = 0, spearman_rmse = 0, calibration = 0;
  bool complete = true;
};

const UncertaintySummary& uncertainty_benchmark() {
  static const UncertaintySummary summary = [] {
    UncertaintySummary s;
    const auto kv = KeyValueConfig::load(source_path("configs/uncertainty.cfg"));
    const SynthConfig base_synth = SynthConfig::from_config(kv);
    const TrainConfig base_train = TrainConfig::from_config(kv);
    const std::uint64_t seeds[] = {1, 2, 3};
    for (std::uint64_t seed : seeds) {
      SynthConfig synth = base_synth;
      synth.seed = seed;
      TrainConfig cfg = base_train;
      cfg.seed = seed;
      auto data = synthetic_dataset(synth, Variant::kSampleSynthesis, seed);
      const auto ck = train(cfg, data).checkpoint;
      const auto r = run_uncertainty_report(ck, data, synth.noise);
      built_datasets().push_back(std::move(data));
      if (!r.spearman_eta || !r.correlations.spearman || !r.calibration) {
        s.complete = false;
        continue;
      }
      s.spearman_eta += *r.spearman_eta / 3;
      s.spearman_rmse += *r.correlations.spearman / 3;
      s.calibration += *r.calibration / 3;
    }
    return s;
  }();
  return summary;
}

Outcome uncertainty_ranking() {
  const auto& s = uncertainty_benchmark();
  return {s.complete && s.spearman_eta > 0.5 && s.spearman_rmse > 0.3,
          fmt("Spearman(sigma, eta) %.3f, Spearman(sigma, rmse) %.3f, mean of 3 seeds",
              s.spearman_eta, s.spearman_rmse)};
}

Outcome calibration() {
  const auto& s = uncertainty_benchmark();
  return {s.complete && s.calibration > 1.0, fmt("mean rmse/sigma %.3f", s.calibration)};
}

Outcome leakage_guard_scan() {
  auto& all = built_datasets();
  const auto smoke = extract_document(read_file(source_path("tests/fixtures/smoke_docs.txt")));
  all.push_back(build_dataset(smoke, {Variant::kSampleSynthesis, 0.2, 7}));
  all.push_back(build_dataset(smoke, {Variant::kSampleOnly, 0.2, 7}));
  // Targets restated in other units inside the descriptive fields.
  const auto tricky = extract_document(
      "== SAMPLE L1 ==\nSample: PLA grade, Tg near 378.2 K, Mw 120 kg/mol\n"
      "Synthesis: held above 221 °F, modulus 2400 MPa\n"
      "Tg = 105 °C. Mw was 1.2 × 10^5 g/mol. Young's modulus was 2.4 GPa.\n"
      "== END SAMPLE ==\n");
  all.push_back(build_dataset(tricky, {}));
  std::size_t instances = 0, hits = 0;
  for (const auto& d : all) {
    instances += d.size();
    hits += scan_leakage(d).size();
  }
  return {hits == 0 && all.size() >= 3,
          fmt("%.0f datasets, %.0f prompts, %.0f surviving targets", double(all.size()),
              double(instances), double(hits))};
}

Outcome lora_contracts() {
  Rng rng(9);
  ModelState s = ModelState::init({}, 9);
  Matrix h(7, s.encoder.dim());
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.normal();
  const bool bitwise = lora_project(h, s.encoder) == Matrix(h * s.encoder.w0.transpose());
  const double fraction = count_parameters(s, true).fraction();
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    EncoderParams p = s.encoder;
    for (Eigen::Index i = 0; i < p.lora_b.size(); ++i) p.lora_b.data()[i] = rng.normal();
    const Matrix out = lora_project(h, p);
    const int d = p.dim(), r = p.rank();
    for (int i = 0; i < h.rows(); ++i) {
      for (int j = 0; j < d; ++j) {
        double acc = 0;
        for (int k = 0; k < d; ++k) {
          double ba = 0;
          for (int q = 0; q < r; ++q) ba += p.lora_b(j, q) * p.lora_a(q, k);
          acc += (p.w0(j, k) + p.alpha / r * ba) * h(i, k);
        }
        worst = std::max(worst, std::fabs(out(i, j) - acc));
      }
    }
  }
  return {bitwise && fraction < 0.02 && worst <= 1e-12,
          std::string(bitwise ? "zero-B bitwise" : "zero-B differs") +
              fmt(", trainable fraction %.4f, dense oracle err %.1e", fraction, worst)};
}

Outcome determinism() {
  const auto ex = extract_document(read_file(source_path("tests/fixtures/smoke_docs.txt")));
  const auto data = build_dataset(ex, {Variant::kSampleSynthesis, 0.2, 7});
  auto cfg = TrainConfig::from_config(KeyValueConfig::load(source_path("tests/fixtures/smoke.cfg")));
  cfg.epochs = 3;
  const auto a = train(cfg, data);
  const auto b = train(cfg, data);
  const std::string ca = serialize_checkpoint(a.checkpoint);
  const std::string cb = serialize_checkpoint(b.checkpoint);
  const std::string ra = report_to_tsv(evaluate(a.checkpoint, data)) +
                         report_to_json(evaluate(a.checkpoint, data));
  const std::string rb = report_to_tsv(evaluate(b.checkpoint, data)) +
                         report_to_json(evaluate(b.checkpoint, data));
  return {ca == cb && ra == rb,
          "checkpoint " + std::to_string(ca.size()) + " bytes " +
              (ca == cb ? "identical" : "differ") + ", reports " +
              (ra == rb ? "identical" : "differ")};
}

Outcome metric_sanity() {
  Rng rng(11);
  double worst_zero = 0, worst_negative = -1e9;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t(40);
    double mean = 0;
    for (double& v : t) mean += (v = 100 + 30 * rng.normal());
    mean /= t.size();
    worst_zero = std::max(worst_zero, std::fabs(r_squared(t, std::vector<double>(t.size(), mean))));
    const double off = mean + (rng.uniform() < 0.5 ? -1 : 1) * (1 + 20 * rng.uniform());
    worst_negative = std::max(worst_negative, r_squared(t, std::vector<double>(t.size(), off)));
  }
  return {worst_zero <= 1e-12 && worst_negative < 0,
          fmt("|R2(mean)| max %.1e, R2(constant off-mean) max %.3f", worst_zero, worst_negative)};
}

}  // namespace
}  // namespace polyprop

// Optional arguments select criteria by number; none runs them all.
int main(int argc, char** argv) {
  using namespace polyprop;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  // Leakage runs after the benchmarks so it can scan what they built.
  const std::vector<std::pair<int, Criterion>> order = {
      {1, {"gradient_correctness", gradient_correctness}},
      {2, {"rho_stationarity", rho_stationarity}},
      {3, {"kde_weight_contracts", kde_contracts}},
      {4, {"extraction_audit", extraction_audit}},
      {5, {"ablation_directionality", ablation_directionality}},
      {6, {"uncertainty_ranking", uncertainty_ranking}},
      {7, {"calibration_underdispersion", calibration}},
      {8, {"leakage_guard", leakage_guard_scan}},
      {9, {"lora_contracts", lora_contracts}},
      {10, {"determinism", determinism}},
      {11, {"metric_sanity", metric_sanity}},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  for (const auto& [id, c] : order) {
    if (!only.empty() && !only.count(id)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
