// Copyright 2026 The motiondepth Authors. All Rights Reserved.
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

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mdepth/tensor.hpp"

namespace mdepth {

struct LossWeights {
  double alpha = 0.64;
  double gamma = 0.0004;
};

// How the multi-level L1 log loss is normalized and weighted. The defaults
// normalize each level by its own pixel count and give level l (l = 1 the
// finest) the weight 2^(l+1). The alternatives exist for A/B comparisons.
struct LossConventions {
  bool per_level_normalization = true;  // false: divide by the ground-truth H*W
  bool finest_level_is_one = true;      // false: the coarsest level is l = 1
};

// Per-level weight 2^(l+1) for the level stored at `index` (0 = finest) of M.
double level_weight(int index, int num_levels, const LossConventions& conv = {});

// Multi-level L1 distance between log depths. `log_estimates[0]` is the finest
// level; each level is compared against the ground truth resized bilinearly
// to its size. Estimates are natural-log depths; `gt` is linear meters.
template <typename T>
double frame_loss_log(std::span<const BasicTensor<T>> log_estimates, const BasicTensor<T>& gt,
                      const LossWeights& w, const LossConventions& conv = {},
                      std::vector<BasicTensor<T>>* grad_log_estimates = nullptr);

// Same loss with linear-meter estimates.
template <typename T>
double frame_loss(std::span<const BasicTensor<T>> estimates, const BasicTensor<T>& gt,
                  const LossWeights& w, const LossConventions& conv = {});

// gamma * sum of squared weights (biases excluded).
template <typename T>
double weight_penalty(std::span<const BasicParamTensor<T>* const> params, double gamma);

// Adds d(weight_penalty)/dw to each weight gradient.
template <typename T>
void add_weight_penalty_grad(std::span<BasicParamTensor<T>* const> params, double gamma);

// Mean of the per-frame losses plus the weight penalty.
template <typename T>
double total_loss(std::span<const double> frame_losses,
                  std::span<const BasicParamTensor<T>* const> params, const LossWeights& w);

struct MetricReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;

  static std::string csv_header();  // "abs_rel,sq_rel,rmse,rmse_log,d1,d2,d3"
  std::string csv_row() const;
  static MetricReport from_csv_row(const std::string& row);
};

// Eigen depth metrics over pixels where `valid_mask` is non-zero (or, with a
// null mask, where gt is finite and positive). Throws kEmptyMask if nothing
// is left to score.
template <typename T>
MetricReport eigen_metrics(const BasicTensor<T>& est, const BasicTensor<T>& gt,
                           const BasicTensor<T>* valid_mask = nullptr);

// Element-wise mean of several reports.
MetricReport mean_report(std::span<const MetricReport> reports);

// Text table with the columns of a standard depth benchmark.
void print_metric_table(std::ostream& os, std::span<const std::pair<std::string, MetricReport>> rows);

}  // namespace mdepth
