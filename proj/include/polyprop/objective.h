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

#ifndef POLYPROP_OBJECTIVE_H_
#define POLYPROP_OBJECTIVE_H_

#include <array>
#include <span>
#include <vector>

#include "polyprop/common.h"
#include "polyprop/registry.h"

namespace polyprop {

// Per-head z-score normalization, in log10 space for log heads.
struct LabelTransform {
  std::array<bool, kNumHeads> active{};
  std::array<bool, kNumHeads> log_space{};
  std::array<double, kNumHeads> mean{};
  std::array<double, kNumHeads> stddev{};
  int dropped_nonpositive = 0;

  // Fits every head that has at least one label. Throws DegenerateHead when
  // such a head has fewer than two usable labels or zero spread.
  static LabelTransform fit(
      const std::array<std::vector<double>, kNumHeads>& labels,
      const Registry& registry = Registry::builtin());

  // False for log heads given a non-positive label.
  bool admissible(int head, double y) const;
  double normalize(int head, double y) const;
  double denormalize(int head, double z) const;
};

inline constexpr double kBandwidthFloor = 1e-3;
inline constexpr double kEpsilonPercentile = 5.0;

double normal_pdf(double x);

// p(y) = 1/(n h) sum_j phi((y - y_j) / h).
double kde_density(std::span<const double> train, double h, double y);

// Linear interpolation between order statistics (the common "type 7" rule).
double percentile(std::vector<double> values, double pct);

// 0.9 min(s, IQR/1.34) n^(-1/5), floored. Falls back to s when IQR is 0.
double silverman_bandwidth(std::span<const double> values);

// raw_i = 1/max(p_i, eps); returns raw_i * n / sum(raw).
std::vector<double> density_weights(std::span<const double> densities,
                                    double epsilon);

// Frozen inverse-density weighting for one head.
struct HeadDensity {
  std::vector<double> train;  // normalized training labels
  double bandwidth = 1.0;
  double epsilon = 0.0;
  double scale = 1.0;  // n / sum(raw) over the training set
  std::vector<double> weights;  // aligned with `train`

  static HeadDensity fit(std::vector<double> normalized_labels);
  // Weight of an arbitrary normalized label under the frozen model.
  double weight(double y) const;
};

struct DensityModel {
  std::array<HeadDensity, kNumHeads> heads;
};

// L_t = (1/N) sum_i w_i (pred_i - target_i)^2.
double task_loss(std::span<const double> pred, std::span<const double> target,
                 std::span<const double> weights);

// sum over present heads of L_t exp(-rho_t)/2 + rho_t/2.
double total_loss(std::span<const double> losses, std::span<const double> rho,
                  std::span<const char> present);

// d(total)/d(rho_t) = -L_t exp(-rho_t)/2 + 1/2 for present heads, else 0.
std::vector<double> total_loss_grad_rho(std::span<const double> losses,
                                        std::span<const double> rho,
                                        std::span<const char> present);

}  // namespace polyprop

#endif  // POLYPROP_OBJECTIVE_H_
