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

#include "polyprop/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "polyprop/text.h"
#include "polyprop/units.h"

namespace polyprop {
namespace {

constexpr const char* kBases[] = {"PLA", "PET", "PS",   "PMMA", "PC",   "PA6",
                                  "PP",  "HDPE", "PEEK", "PVDF", "PBT", "ABS"};
constexpr const char* kFillers[] = {"glass fiber", "carbon fiber", "talc",
                                    "silica", "graphene", "clay"};
constexpr int kLoadings[] = {0, 5, 10, 20, 30};
constexpr const char* kMethods[] = {"injection molded", "compression molded",
                                    "solution cast", "melt extruded", "3D printed"};
constexpr int kAnnealTemps[] = {60, 80, 100, 120, 140};
constexpr int kAnnealHours[] = {1, 2, 4, 8, 16};
constexpr const char* kCooling[] = {"quenched in ice water", "slowly cooled",
                                    "air cooled"};
constexpr const char* kAtmosphere[] = {"nitrogen", "air", "vacuum"};

template <typename T, std::size_t N>
constexpr int count_of(const T (&)[N]) {
  return static_cast<int>(N);
}

// Label scale per head: center and scale in canonical units (log10 units for
// log heads), plus the unit symbols prose may use.
struct HeadStyle {
  double center;
  double scale;
  std::vector<std::string> units;
  std::string phrase;
};

const std::array<HeadStyle, kNumHeads>& styles() {
  static const std::array<HeadStyle, kNumHeads> s = {{
      {90.0, 30.0, {"°C", "K"}, "glass transition temperature"},
      {180.0, 40.0, {"°C", "K"}, "melting temperature"},
      {120.0, 25.0, {"°C", "K"}, "crystallization temperature"},
      {340.0, 35.0, {"°C", "K"}, "five percent weight loss temperature"},
      {320.0, 35.0, {"°C"}, "onset degradation temperature"},
      {1.70, 0.16, {"MPa", "psi"}, "tensile strength"},
      {3.30, 0.18, {"MPa", "GPa"}, "Young's modulus"},
      {40.0, 15.0, {"%"}, "elongation at break"},
      {1.85, 0.16, {"MPa"}, "flexural strength"},
      {1.90, 0.16, {"MPa", "ksi"}, "compressive strength"},
      {20.0, 6.0, {"kJ/m²", "J/m²"}, "impact strength"},
      {1.60, 0.16, {"MPa"}, "yield strength"},
      {3.40, 0.18, {"MPa", "GPa"}, "flexural modulus"},
      {-8.0, 1.5, {"S/cm", "S/m"}, "electrical conductivity"},
      {0.50, 0.08, {"1"}, "dielectric constant"},
      {-0.60, 0.15, {"W/(m·K)", "mW/(m·K)"}, "thermal conductivity"},
      {1.20, 0.10, {"g/cm³", "kg/m³"}, "density"},
      {4.60, 0.25, {"g/mol", "kg/mol"}, "number-average molecular weight"},
      {5.00, 0.25, {"g/mol", "kg/mol"}, "weight-average molecular weight"},
      {2.00, 0.30, {"1"}, "dispersity"},
      {35.0, 8.0, {"%"}, "crystallinity"},
      {2.50, 0.40, {"Pa·s", "mPa·s"}, "melt viscosity"},
  }};
  return s;
}

// Levels of one categorical factor get weights with mean 0 and variance
// `share` over a uniform draw.
std::vector<double> factor_weights(int levels, double share, Rng& rng) {
  std::vector<double> w(levels);
  for (double& x : w) x = rng.normal();
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= levels;
  double var = 0.0;
  for (double& x : w) {
    x -= mean;
    var += x * x;
  }
  var /= levels;
  const double scale = var > 0.0 ? std::sqrt(share / var) : 0.0;
  for (double& x : w) x *= scale;
  return w;
}

struct HeadWeights {
  std::vector<double> base, filler, loading;
  std::vector<double> method, temp, hours, cooling, atmosphere;
};

// Four significant digits; tiny or huge magnitudes use "m × 10^n".
std::string format_value(double v) {
  char buf[64];
  const double a = std::fabs(v);
  if (a != 0.0 && (a < 1e-2 || a >= 1e6)) {
    int e = static_cast<int>(std::floor(std::log10(a)));
    double m = v / std::pow(10.0, e);
    std::snprintf(buf, sizeof(buf), "%.2f", m);
    if (std::fabs(std::stod(buf)) >= 10.0) {
      ++e;
      m = v / std::pow(10.0, e);
      std::snprintf(buf, sizeof(buf), "%.2f", m);
    }
    return std::string(buf) + " × 10^" + std::to_string(e);
  }
  const int mag = a == 0.0 ? 0 : static_cast<int>(std::floor(std::log10(a)));
  const int decimals = std::max(0, 3 - mag);
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string quantity_text(double canonical, const std::string& symbol) {
  if (symbol == "1") return format_value(canonical);
  const Unit& u = unit_by_symbol(symbol);
  return format_value(u.from_canonical(canonical)) + " " + symbol;
}

std::string sentence(int template_id, const std::string& phrase,
                     const std::string& quantity) {
  std::string cap = phrase;
  if (!cap.empty() && cap[0] >= 'a' && cap[0] <= 'z') cap[0] = char(cap[0] - 32);
  switch (template_id % 4) {
    case 0: return "The " + phrase + " was " + quantity + ".";
    case 1: return cap + " of " + quantity + " was measured.";
    case 2: return "A " + phrase + " of " + quantity + " was obtained.";
    default: return cap + " reached " + quantity + ".";
  }
}

}  // namespace

double skew_transform(double s, double k) {
  if (k == 0.0) return s;
  return std::expm1(k * s) / k;
}

SynthConfig::SynthConfig() { noise.fill(0.3); }

std::vector<int> SynthConfig::head_list() const {
  if (!heads.empty()) return heads;
  std::vector<int> all(kNumHeads);
  for (int h = 0; h < kNumHeads; ++h) all[h] = h;
  return all;
}

SynthConfig SynthConfig::from_config(const KeyValueConfig& kv) {
  SynthConfig c;
  c.seed = kv.get_uint("synth.seed", c.seed);
  c.documents = static_cast<int>(kv.get_int("synth.documents", c.documents));
  c.gamma = kv.get_double("synth.gamma", c.gamma);
  c.skew = kv.get_double("synth.skew", c.skew);
  c.min_labels = static_cast<int>(kv.get_int("synth.min_labels", c.min_labels));
  c.max_labels = static_cast<int>(kv.get_int("synth.max_labels", c.max_labels));
  const Registry& reg = Registry::builtin();
  for (const std::string& name : kv.get_list("synth.heads")) {
    if (name == "all") {
      for (int h = 0; h < kNumHeads; ++h) c.heads.push_back(h);
    } else if (const auto g = parse_group(name)) {
      for (int h : reg.heads_in(*g)) c.heads.push_back(h);
    } else if (const PropertySpec* s = reg.lookup(name)) {
      c.heads.push_back(s->head_id);
    } else {
      throw ConfigError("synth.heads: unknown head or group '" + name + "'");
    }
  }
  std::sort(c.heads.begin(), c.heads.end());
  c.heads.erase(std::unique(c.heads.begin(), c.heads.end()), c.heads.end());
  const auto noise = kv.get_doubles("synth.noise");
  const auto list = c.head_list();
  if (noise.size() == 1) {
    c.noise.fill(noise[0]);
  } else if (!noise.empty()) {
    if (noise.size() != list.size()) {
      throw ConfigError("synth.noise needs one value or one per head");
    }
    for (std::size_t i = 0; i < list.size(); ++i) c.noise[list[i]] = noise[i];
  }
  kv.reject_unread("synth.");
  if (c.documents < 1) throw ConfigError("synth.documents must be >= 1");
  if (c.gamma < 0.0 || c.gamma > 1.0) throw ConfigError("synth.gamma must lie in [0, 1]");
  for (double e : c.noise) {
    if (e < 0.0) throw ConfigError("synth.noise must be >= 0");
  }
  if (c.skew < 0.0) throw ConfigError("synth.skew must be >= 0");
  if (c.min_labels < 1 || c.max_labels < c.min_labels) {
    throw ConfigError("synth label counts must satisfy 1 <= min <= max");
  }
  return c;
}

std::string SynthConfig::serialize() const {
  KeyValueConfig kv;
  kv.set("synth.seed", std::to_string(seed));
  kv.set("synth.documents", std::to_string(documents));
  kv.set("synth.gamma", format_double(gamma));
  kv.set("synth.skew", format_double(skew));
  kv.set("synth.min_labels", std::to_string(min_labels));
  kv.set("synth.max_labels", std::to_string(max_labels));
  std::string hs, ns;
  for (int h : head_list()) {
    hs += (hs.empty() ? "" : ",") + Registry::builtin().spec(h).name;
    ns += (ns.empty() ? "" : ",") + format_double(noise[h]);
  }
  kv.set("synth.heads", hs);
  kv.set("synth.noise", ns);
  return kv.serialize();
}

Corpus gen_corpus(const SynthConfig& cfg) {
  const Registry& reg = Registry::builtin();
  const auto heads = cfg.head_list();
  std::array<HeadWeights, kNumHeads> w;
  Rng weight_rng(derive_seed(cfg.seed, "synth.weights"));
  for (int h = 0; h < kNumHeads; ++h) {
    w[h].base = factor_weights(count_of(kBases), 1.0 / 3.0, weight_rng);
    w[h].filler = factor_weights(count_of(kFillers), 1.0 / 3.0, weight_rng);
    w[h].loading = factor_weights(count_of(kLoadings), 1.0 / 3.0, weight_rng);
    w[h].method = factor_weights(count_of(kMethods), 0.2, weight_rng);
    w[h].temp = factor_weights(count_of(kAnnealTemps), 0.2, weight_rng);
    w[h].hours = factor_weights(count_of(kAnnealHours), 0.2, weight_rng);
    w[h].cooling = factor_weights(count_of(kCooling), 0.2, weight_rng);
    w[h].atmosphere = factor_weights(count_of(kAtmosphere), 0.2, weight_rng);
  }

  Rng rng(derive_seed(cfg.seed, "synth.documents"));
  Corpus out;
  std::ostringstream doc;
  const int width = std::max(5, static_cast<int>(std::to_string(cfg.documents).size()));
  for (int d = 0; d < cfg.documents; ++d) {
    std::string id = std::to_string(d + 1);
    id = "S" + std::string(width - id.size(), '0') + id;

    const int base = static_cast<int>(rng.below(count_of(kBases)));
    const int filler = static_cast<int>(rng.below(count_of(kFillers)));
    const int load = static_cast<int>(rng.below(count_of(kLoadings)));
    const int method = static_cast<int>(rng.below(count_of(kMethods)));
    const int temp = static_cast<int>(rng.below(count_of(kAnnealTemps)));
    const int hours = static_cast<int>(rng.below(count_of(kAnnealHours)));
    const int cooling = static_cast<int>(rng.below(count_of(kCooling)));
    const int atmos = static_cast<int>(rng.below(count_of(kAtmosphere)));

    std::string sample = kLoadings[load] == 0
                             ? std::string("neat ") + kBases[base] + " film"
                             : std::string(kBases[base]) + " composite with " +
                                   std::to_string(kLoadings[load]) + " wt% " +
                                   kFillers[filler];
    const std::string synthesis =
        std::string(kMethods[method]) + ", annealed at " +
        std::to_string(kAnnealTemps[temp]) + " °C for " + std::to_string(kAnnealHours[hours]) +
        " h, " + kCooling[cooling] + " under " + kAtmosphere[atmos];

    // Which heads this sample reports.
    std::vector<int> chosen = heads;
    const int span = cfg.max_labels - cfg.min_labels + 1;
    const int k = std::min<int>(static_cast<int>(chosen.size()),
                                cfg.min_labels + static_cast<int>(rng.below(span)));
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng.below(chosen.size() - i));
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(k);
    std::sort(chosen.begin(), chosen.end());

    std::string prose;
    for (int h : chosen) {
      const HeadWeights& hw = w[h];
      const double f = hw.base[base] + (kLoadings[load] == 0 ? 0.0 : hw.filler[filler]) +
                       hw.loading[load];
      const double g = hw.method[method] + hw.temp[temp] + hw.hours[hours] +
                       hw.cooling[cooling] + hw.atmosphere[atmos];
      const double gamma_t =
          reg.spec(h).group == Group::kMechanical ? cfg.gamma : 0.5 * cfg.gamma;
      const double eps = rng.normal();
      const double latent = f + gamma_t * g + cfg.noise[h] * eps;
      const HeadStyle& st = styles()[h];
      const double x = st.center + st.scale * skew_transform(latent, cfg.skew);
      const double value = reg.is_log_space(h) ? std::pow(10.0, x) : x;
      out.truth.push_back({id, h, latent, value});
      const std::string& unit = st.units[rng.below(st.units.size())];
      const int tmpl = static_cast<int>(rng.below(4));
      if (!prose.empty()) prose += ' ';
      prose += sentence(tmpl, st.phrase, quantity_text(value, unit));
    }

    doc << "== SAMPLE " << id << " ==\n"
        << "Sample: " << sample << "\n"
        << "Synthesis: " << synthesis << "\n"
        << prose << "\n"
        << "== END SAMPLE ==\n";
  }
  out.document = doc.str();
  return out;
}

std::string truth_to_tsv(const std::vector<TruthRecord>& truth) {
  std::ostringstream body;
  body << "sample_id\thead\tlatent\tvalue\n";
  const Registry& reg = Registry::builtin();
  for (const auto& t : truth) {
    body << t.sample_id << '\t' << reg.spec(t.head_id).name << '\t'
         << format_double(t.latent) << '\t' << format_double(t.value) << '\n';
  }
  const std::string content = body.str();
  return content + "# digest=" + hex64(fnv1a64(content)) + "\n";
}

}  // namespace polyprop
