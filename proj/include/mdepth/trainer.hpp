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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mdepth/loss_metrics.hpp"
#include "mdepth/network.hpp"
#include "mdepth/sequence.hpp"

namespace mdepth {

struct TrainConfig {
  int batch_sequences = 3;
  int seq_len = 4;
  int total_iters = 2000;
  double base_lr = 1e-4;
  int lr_halving_period = 0;  // 0: 30% of total_iters
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // 0: only the final checkpoint
  int threads = 1;           // batch elements processed concurrently
  LossWeights loss{};
  LossConventions conventions{};
  NetworkConfig network{};

  int halving_period() const;
  void validate() const;

  // Flat key=value text. Network keys are addressed by their plain names.
  bool set(const std::string& key, const std::string& value);
  std::string to_text() const;
  static TrainConfig from_text(const std::string& text);
  static TrainConfig from_file(const std::filesystem::path& path);
};

// base_lr * 2^-floor(iter / period)
double learning_rate(const TrainConfig& cfg, long iter);

// Unrolls the network over every frame of `clip`, returns the mean frame loss
// (without the weight penalty). When `grads` is given, the gradient of that
// mean is accumulated into it by backpropagation through time.
// `geometry`, when given, receives the warp geometry of every step; if it
// already holds one entry per frame, those are reused (frozen).
template <typename T>
double clip_loss(const DepthNetwork<T>& net, const SequenceSample& clip, const LossWeights& w,
                 const LossConventions& conv, ParamGrads<T>* grads,
                 std::vector<FrozenGeometry>* geometry = nullptr);

struct TrainResult {
  std::vector<double> losses;  // one per iteration
  std::filesystem::path checkpoint;
};

struct TrainCallbacks {
  std::function<void(long iter, double loss, double lr)> on_iteration;
};

// Trains on `dataset` (clips of at least seq_len frames), writing
// `out_dir/loss.csv` and `out_dir/model.ckpt` (plus periodic
// `out_dir/model_<iter>.ckpt`). Throws NonFiniteLoss after writing
// `out_dir/nonfinite_batch.txt`.
TrainResult train(const TrainConfig& cfg, const std::vector<SequenceSample>& dataset,
                  const std::filesystem::path& out_dir, const TrainCallbacks& callbacks = {});

// Final-frame depth for the frames of a sequence.
using DepthPredictor = std::function<Tensor(const SequenceSample&)>;

DepthPredictor network_predictor(const DepthNetwork<float>& net);
DepthPredictor oracle_predictor();
DepthPredictor constant_predictor(double depth);

// Feeds the last `test_seq_len` frames of every sequence, scores only the
// final frame and averages the reports over sequences.
MetricReport evaluate(const DepthPredictor& predict, const std::vector<SequenceSample>& dataset,
                      int test_seq_len);

// RMSE-log grid: rows index the predictors, columns the test lengths.
std::vector<std::vector<double>> rmse_log_grid(const std::vector<DepthPredictor>& predictors,
                                               const std::vector<SequenceSample>& dataset,
                                               const std::vector<int>& test_lengths);

}  // namespace mdepth
