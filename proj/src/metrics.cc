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

#include "polyprop/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "polyprop/quantity.h"
#include "polyprop/text.h"

namespace polyprop {
namespace {

using json = nlohmann::json;

bool selected(const PromptInstance& inst, SplitSelector split) {
  switch (split) {
    case SplitSelector::kTest: return inst.test_split;
    case SplitSelector::kTrain: return !inst.test_split;
    case SplitSelector::kAll: return true;
  }
  return false;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> macro(const std::vector<HeadEval>& heads,
                            std::optional<double> HeadEval::*field) {
  double sum = 0.0;
  int n = 0;
  for (const auto& h : heads) {
    if (h.*field) {
      sum += *(h.*field);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string opt(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

double r_squared(std::span<const double> targets, std::span<const double> preds,
                 Space space, int* excluded) {
  require(targets.size() == preds.size(), "r_squared: length mismatch");
  std::vector<double> t, p;
  int dropped = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (space == Space::kLog10) {
      if (!(targets[i] > 0.0) || !(preds[i] > 0.0)) {
        ++dropped;
        continue;
      }
      t.push_back(std::log10(targets[i]));
      p.push_back(std::log10(preds[i]));
    } else {
      t.push_back(targets[i]);
      p.push_back(preds[i]);
    }
  }
  if (excluded) *excluded = dropped;
  require(t.size() >= 2, "r_squared: needs at least two pairs");
  const double mu = mean_of(t);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sse += (p[i] - t[i]) * (p[i] - t[i]);
    sst += (t[i] - mu) * (t[i] - mu);
  }
  if (!(sst > 0.0)) throw ZeroVariance("r_squared: targets have zero variance");
  return 1.0 - sse / sst;
}

double mae(std::span<const double> targets, std::span<const double> preds) {
  require(targets.size() == preds.size() && !targets.empty(), "mae: bad lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) s += std::fabs(preds[i] - targets[i]);
  return s / static_cast<double>(targets.size());
}

double rmse(std::span<const double> targets, std::span<const double> preds) {
  require(targets.size() == preds.size() && !targets.empty(), "rmse: bad lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  }
  return std::sqrt(s / static_cast<double>(targets.size()));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "pearson: bad lengths");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Correlations rank_correlations(std::span<const double> sigma,
                               std::span<const double> rmse_values) {
  require(sigma.size() == rmse_values.size() && sigma.size() >= 3,
          "rank_correlations: needs at least three pairs");
  return {pearson(sigma, rmse_values), spearman(sigma, rmse_values)};
}

double calibration_ratio(std::span<const double> rmse_values,
                         std::span<const double> sigma) {
  require(rmse_values.size() == sigma.size() && !sigma.empty(),
          "calibration_ratio: bad lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    require(sigma[i] > 0.0, "calibration_ratio: sigma must be positive");
    s += rmse_values[i] / sigma[i];
  }
  return s / static_cast<double>(sigma.size());
}

std::optional<double> strict_numeric_parse(std::string_view response, int head_id) {
  const auto parsed = parse_quantity(trim(response));
  const Quantity* q = std::get_if<Quantity>(&parsed);
  if (q == nullptr || q->kind != QuantityKind::kPoint) return std::nullopt;
  if (!q->unit) return q->value;
  try {
    return to_canonical(*q, Registry::builtin().spec(head_id));
  } catch (const IncompatibleUnit&) {
    return std::nullopt;
  }
}

HeadEval evaluate_head(int head_id, std::span<const double> targets,
                       std::span<const double> preds) {
  HeadEval e;
  e.head_id = head_id;
  e.n = static_cast<int>(targets.size());
  e.primary_is_log = Registry::builtin().is_log_space(head_id);
  if (e.n == 0) return e;
  e.mae = mae(targets, preds);
  e.rmse = rmse(targets, preds);
  if (e.n >= 2) {
    try {
      e.r2_linear = r_squared(targets, preds, Space::kLinear);
    } catch (const ZeroVariance&) {
    }
    try {
      e.r2_log = r_squared(targets, preds, Space::kLog10, &e.log_excluded);
    } catch (const ZeroVariance&) {
    } catch (const ContractViolation&) {
      // Fewer than two positive pairs: the log metric is absent.
    }
  }
  e.primary = e.primary_is_log ? e.r2_log : e.r2_linear;
  return e;
}

void finalize_report(EvalReport& report) {
  report.macro_r2_linear = macro(report.heads, &HeadEval::r2_linear);
  report.macro_r2_log = macro(report.heads, &HeadEval::r2_log);
  report.macro_primary = macro(report.heads, &HeadEval::primary);
  std::vector<double> sig, err;
  for (const auto& h : report.heads) {
    if (h.sigma && h.rmse_normalized) {
      sig.push_back(*h.sigma);
      err.push_back(*h.rmse_normalized);
    }
  }
  if (sig.size() >= 3) report.uncertainty = rank_correlations(sig, err);
  if (!sig.empty()) report.calibration = calibration_ratio(err, sig);
}

EvalReport evaluate(const Checkpoint& ckpt, std::span<const PromptInstance> data,
                    SplitSelector split) {
  EvalReport report;
  report.config_digest = ckpt.config_digest;
  const int vocab = ckpt.state.encoder.vocab();
  std::array<std::vector<double>, kNumHeads> targets, preds, zt, zp;
  for (const auto& inst : data) {
    if (!selected(inst, split)) continue;
    bool any = false;
    for (int h = 0; h < kNumHeads; ++h) any |= inst.label_mask[h] && ckpt.trained_heads[h];
    if (!any) continue;
    const auto buckets = token_buckets(tokenize(inst.text), vocab);
    const Vector z = predict(ckpt.state, buckets);
    for (int h = 0; h < kNumHeads; ++h) {
      if (!inst.label_mask[h] || !ckpt.trained_heads[h]) continue;
      targets[h].push_back(inst.labels[h]);
      preds[h].push_back(ckpt.transform.denormalize(h, z(h)));
      if (ckpt.transform.admissible(h, inst.labels[h])) {
        zt[h].push_back(ckpt.transform.normalize(h, inst.labels[h]));
        zp[h].push_back(z(h));
      }
    }
  }
  for (int h = 0; h < kNumHeads; ++h) {
    if (targets[h].empty()) continue;
    HeadEval e = evaluate_head(h, targets[h], preds[h]);
    if (!zt[h].empty()) e.rmse_normalized = rmse(zt[h], zp[h]);
    e.sigma = std::exp(0.5 * ckpt.state.rho(h));
    report.heads.push_back(std::move(e));
  }
  finalize_report(report);
  return report;
}

EvalReport score_predictions(std::string_view predictions,
                             std::span<const PromptInstance> data,
                             SplitSelector split) {
  std::map<std::string, const PromptInstance*> by_id;
  for (const auto& inst : data) {
    if (selected(inst, split)) by_id[inst.sample_id] = &inst;
  }
  EvalReport report;
  std::array<std::vector<double>, kNumHeads> targets, preds;
  int line_no = 0;
  for (const std::string& raw : polyprop::split(predictions, '\n')) {
    ++line_no;
    if (raw.empty() || raw.front() == '#') continue;
    const auto f = polyprop::split(raw, '\t');
    if (f.size() != 3) {
      throw ConfigError("predictions line " + std::to_string(line_no) +
                        ": expected sample_id, head, response");
    }
    if (f[0] == "sample_id") continue;
    const PropertySpec* spec = Registry::builtin().lookup(f[1]);
    if (spec == nullptr) {
      throw ConfigError("predictions line " + std::to_string(line_no) +
                        ": unknown head '" + f[1] + "'");
    }
    const auto it = by_id.find(f[0]);
    if (it == by_id.end() || !it->second->label_mask[spec->head_id]) continue;
    ++report.responses_total;
    const auto v = strict_numeric_parse(unescape_field(f[2]), spec->head_id);
    if (!v) continue;
    ++report.responses_retained;
    targets[spec->head_id].push_back(it->second->labels[spec->head_id]);
    preds[spec->head_id].push_back(*v);
  }
  for (int h = 0; h < kNumHeads; ++h) {
    if (!targets[h].empty()) report.heads.push_back(evaluate_head(h, targets[h], preds[h]));
  }
  finalize_report(report);
  return report;
}

std::string report_to_tsv(const EvalReport& report) {
  std::ostringstream body;
  body << "head\tgroup\tn\tr2_linear\tr2_log\tlog_excluded\tmae\trmse\tprimary_metric"
          "\tprimary\trmse_normalized\tsigma\n";
  const Registry& reg = Registry::builtin();
  for (const auto& h : report.heads) {
    const PropertySpec& s = reg.spec(h.head_id);
    body << s.name << '\t' << group_name(s.group) << '\t' << h.n << '\t'
         << opt(h.r2_linear) << '\t' << opt(h.r2_log) << '\t' << h.log_excluded << '\t'
         << format_double(h.mae) << '\t' << format_double(h.rmse) << '\t'
         << (h.primary_is_log ? "r2_log" : "r2_linear") << '\t' << opt(h.primary) << '\t'
         << opt(h.rmse_normalized) << '\t' << opt(h.sigma) << '\n';
  }
  body << "# macro_r2_linear=" << opt(report.macro_r2_linear)
       << " macro_r2_log=" << opt(report.macro_r2_log)
       << " macro_primary=" << opt(report.macro_primary) << '\n';
  body << "# pearson=" << opt(report.uncertainty.pearson)
       << " spearman=" << opt(report.uncertainty.spearman)
       << " calibration_ratio=" << opt(report.calibration) << '\n';
  if (report.responses_total > 0) {
    body << "# responses=" << report.responses_total
         << " retained=" << report.responses_retained << '\n';
  }
  const std::string content = body.str();
  return content + "# config=" + hex64(report.config_digest) +
         " digest=" + hex64(fnv1a64(content)) + "\n";
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["format"] = "polyprop.eval";
  j["config_digest"] = hex64(report.config_digest);
  json heads = json::array();
  const Registry& reg = Registry::builtin();
  for (const auto& h : report.heads) {
    heads.push_back({{"head", reg.spec(h.head_id).name},
                     {"n", h.n},
                     {"r2_linear", opt_json(h.r2_linear)},
                     {"r2_log", opt_json(h.r2_log)},
                     {"log_excluded", h.log_excluded},
                     {"mae", h.mae},
                     {"rmse", h.rmse},
                     {"primary_metric", h.primary_is_log ? "r2_log" : "r2_linear"},
                     {"primary", opt_json(h.primary)},
                     {"rmse_normalized", opt_json(h.rmse_normalized)},
                     {"sigma", opt_json(h.sigma)}});
  }
  j["heads"] = heads;
  j["macro"] = {{"r2_linear", opt_json(report.macro_r2_linear)},
                {"r2_log", opt_json(report.macro_r2_log)},
                {"primary", opt_json(report.macro_primary)}};
  j["uncertainty"] = {{"pearson", opt_json(report.uncertainty.pearson)},
                      {"spearman", opt_json(report.uncertainty.spearman)},
                      {"calibration_ratio", opt_json(report.calibration)}};
  if (report.responses_total > 0) {
    j["responses"] = {{"total", report.responses_total},
                      {"retained", report.responses_retained},
                      {"retention", double(report.responses_retained) / report.responses_total}};
  }
  return j.dump(2) + "\n";
}

}  // namespace polyprop
