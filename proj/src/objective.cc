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

#include "polyprop/objective.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyprop {

LabelTransform LabelTransform::fit(
    const std::array<std::vector<double>, kNumHeads>& labels,
    const Registry& registry) {
  LabelTransform t;
  for (int h = 0; h < kNumHeads; ++h) {
    t.log_space[h] = registry.is_log_space(h);
    t.stddev[h] = 1.0;
    if (labels[h].empty()) continue;
    std::vector<double> xs;
    for (double y : labels[h]) {
      if (!std::isfinite(y)) continue;
      if (t.log_space[h]) {
        if (y <= 0.0) {
          ++t.dropped_nonpositive;
          continue;
        }
        xs.push_back(std::log10(y));
      } else {
        xs.push_back(y);
      }
    }
    const std::string& name = registry.spec(h).name;
    if (xs.size() < 2) {
      throw DegenerateHead("head " + name + " has fewer than 2 usable labels");
    }
    const double n = static_cast<double>(xs.size());
    const double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    const double s = std::sqrt(ss / n);
    if (!(s > 0.0)) throw DegenerateHead("head " + name + " has zero variance");
    t.active[h] = true;
    t.mean[h] = mu;
    t.stddev[h] = s;
  }
  return t;
}

bool LabelTransform::admissible(int head, double y) const {
  return std::isfinite(y) && (!log_space[head] || y > 0.0);
}

double LabelTransform::normalize(int head, double y) const {
  require(head >= 0 && head < kNumHeads && active[head],
          "normalize: head not fitted");
  require(admissible(head, y), "normalize: label outside the head's domain");
  const double x = log_space[head] ? std::log10(y) : y;
  return (x - mean[head]) / stddev[head];
}

double LabelTransform::denormalize(int head, double z) const {
  require(head >= 0 && head < kNumHeads && active[head],
          "denormalize: head not fitted");
  const double x = mean[head] + stddev[head] * z;
  return log_space[head] ? std::pow(10.0, x) : x;
}

double normal_pdf(double x) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double kde_density(std::span<const double> train, double h, double y) {
  require(h > 0.0, "kde_density: bandwidth must be positive");
  require(!train.empty(), "kde_density: empty training set");
  double sum = 0.0;
  for (double yj : train) sum += normal_pdf((y - yj) / h);
  return sum / (static_cast<double>(train.size()) * h);
}

double percentile(std::vector<double> values, double pct) {
  require(!values.empty(), "percentile: empty input");
  require(pct >= 0.0 && pct <= 100.0, "percentile: pct outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return std::max(1.0, kBandwidthFloor);
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  const std::vector<double> copy(values.begin(), values.end());
  const double iqr = percentile(copy, 75.0) - percentile(copy, 25.0);
  const double spread = iqr > 0.0 ? std::min(s, iqr / 1.34) : s;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  return std::max(h, kBandwidthFloor);
}

std::vector<double> density_weights(std::span<const double> densities,
                                    double epsilon) {
  require(epsilon > 0.0, "density_weights: epsilon must be positive");
  std::vector<double> raw;
  raw.reserve(densities.size());
  double total = 0.0;
  for (double p : densities) {
    require(p >= 0.0, "density_weights: negative density");
    raw.push_back(1.0 / std::max(p, epsilon));
    total += raw.back();
  }
  const double scale = static_cast<double>(raw.size()) / total;
  for (double& r : raw) r *= scale;
  return raw;
}

HeadDensity HeadDensity::fit(std::vector<double> normalized_labels) {
  require(!normalized_labels.empty(), "HeadDensity::fit: no labels");
  HeadDensity d;
  d.train = std::move(normalized_labels);
  d.bandwidth = silverman_bandwidth(d.train);
  std::vector<double> dens;
  dens.reserve(d.train.size());
  for (double y : d.train) dens.push_back(kde_density(d.train, d.bandwidth, y));
  // Densities are positive for in-sample points, so epsilon is too.
  d.epsilon = percentile(dens, kEpsilonPercentile);
  double total = 0.0;
  for (double p : dens) total += 1.0 / std::max(p, d.epsilon);
  d.scale = static_cast<double>(dens.size()) / total;
  d.weights = density_weights(dens, d.epsilon);
  return d;
}

double HeadDensity::weight(double y) const {
  return scale / std::max(kde_density(train, bandwidth, y), epsilon);
}

double task_loss(std::span<const double> pred, std::span<const double> target,
                 std::span<const double> weights) {
  require(pred.size() == target.size() && pred.size() == weights.size(),
          "task_loss: length mismatch");
  require(!pred.empty(), "task_loss: empty valid set");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += weights[i] * e * e;
  }
  return sum / static_cast<double>(pred.size());
}

double total_loss(std::span<const double> losses, std::span<const double> rho,
                  std::span<const char> present) {
  require(losses.size() == rho.size() && rho.size() == present.size(),
          "total_loss: length mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    if (!present[t]) continue;
    total += 0.5 * losses[t] * std::exp(-rho[t]) + 0.5 * rho[t];
  }
  return total;
}

std::vector<double> total_loss_grad_rho(std::span<const double> losses,
                                        std::span<const double> rho,
                                        std::span<const char> present) {
  require(losses.size() == rho.size() && rho.size() == present.size(),
          "total_loss_grad_rho: length mismatch");
  std::vector<double> g(rho.size(), 0.0);
  for (std::size_t t = 0; t < rho.size(); ++t) {
    if (present[t]) g[t] = -0.5 * losses[t] * std::exp(-rho[t]) + 0.5;
  }
  return g;
}

}  // namespace polyprop
