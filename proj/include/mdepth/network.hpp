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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdepth/camera.hpp"
#include "mdepth/geometric_layers.hpp"
#include "mdepth/ops.hpp"
#include "mdepth/sequence.hpp"
#include "mdepth/tensor.hpp"

namespace mdepth {

struct NetworkConfig {
  int num_levels = 6;
  std::vector<int> encoder_channels{16, 32, 64, 96, 128, 192};
  std::vector<int> estimator_channels{128, 128, 128, 96, 64, 32, 1};
  int cost_radius = 4;
  double d_init = 50.0;  // meters; prior fed to the coarsest level
  double leaky_slope = 0.1;
  DepthRange depth_range{};
  bool transform_warped_depth = true;

  void validate() const;

  // Channels fed to the depth estimator at `level` (0 = finest):
  // features | cost volume | warped log depth | upsampled log depth | grid (2) | motion (6)
  int estimator_input_channels(int level) const;

  // Flat key=value lines; every field round-trips.
  std::string to_text() const;
  static NetworkConfig from_text(const std::string& text);
  // Applies one key=value assignment. Returns false for unknown keys.
  bool set(const std::string& key, const std::string& value);
};

inline constexpr int kMotionChannels = 6;

// Recurrent inputs of one pyramid level: encoder features and depth (meters)
// from the previous time step, at that level's resolution.
template <typename T>
struct BasicLevelState {
  BasicTensor<T> features;
  BasicTensor<T> depth;
};

template <typename T>
struct BasicSequenceState {
  std::vector<BasicLevelState<T>> levels;  // index 0 = finest
  long timestep = 0;
};

using SequenceState = BasicSequenceState<float>;

template <typename T>
struct StepOutput {
  BasicTensor<T> depth;                      // full resolution, meters
  std::vector<BasicTensor<T>> level_depths;  // index 0 = finest, meters
  std::vector<BasicTensor<T>> level_log_depths;
  std::vector<std::shared_ptr<const WarpPlan>> plans;  // warp geometry used per level
};

// Warp geometry to reuse instead of deriving it from the upsampled depth.
// Evaluating the objective with frozen geometry makes finite differences see
// the same gradient stop the analytic backward applies.
using FrozenGeometry = std::vector<std::shared_ptr<const WarpPlan>>;

template <typename T>
struct StepTape;  // forward intermediates kept for backpropagation

// Parameter gradients laid out like DepthNetwork::params().
template <typename T>
using ParamGrads = std::vector<BasicTensor<T>>;

// Gradients with respect to a SequenceState (depth part in meters).
template <typename T>
struct StateGrads {
  std::vector<BasicTensor<T>> features;
  std::vector<BasicTensor<T>> depth;
};

template <typename T>
class DepthNetwork {
 public:
  DepthNetwork(NetworkConfig cfg, std::uint64_t seed);

  const NetworkConfig& config() const { return cfg_; }

  std::vector<BasicParamTensor<T>>& params() { return params_; }
  const std::vector<BasicParamTensor<T>>& params() const { return params_; }
  std::vector<BasicParamTensor<T>*> param_ptrs();
  std::vector<const BasicParamTensor<T>*> param_ptrs() const;
  ParamGrads<T> make_param_grads() const;

  // Returns level features, index 0 = finest (H/2 x W/2).
  std::vector<BasicTensor<T>> encode(const BasicTensor<T>& image) const;

  // Builds the estimator input of one level. `d_up_log` is the upsampled
  // log depth from the coarser level (or the log d_init fill at the coarsest).
  BasicTensor<T> preprocess_level(int level, const BasicTensor<T>& features,
                                  const BasicLevelState<T>& prev, const BasicTensor<T>& d_up_log,
                                  const RigidTransform& motion, const Intrinsics& k_level) const;

  // Seven 3x3 convolutions; returns depth in meters (clamped to the range).
  BasicTensor<T> estimate_depth_level(int level, const BasicTensor<T>& input) const;

  // One time step. `k` are the full-resolution intrinsics. When `state` is
  // empty (t = 0) the previous step is replaced by the current frame with
  // identity motion and d_init depth.
  StepOutput<T> step(const BasicTensor<T>& image, const RigidTransform& motion,
                     const Intrinsics& k, BasicSequenceState<T>& state,
                     StepTape<T>* tape = nullptr,
                     const FrozenGeometry* frozen = nullptr) const;

  // Backpropagates one recorded step. `grad_log_depths` is dLoss/d(log depth)
  // per level (may be empty tensors), `grad_state_out` the gradient flowing
  // back from the next step into the state this step produced. Parameter
  // gradients are accumulated into `param_grads`; the returned value is the
  // gradient with respect to the state this step consumed.
  StateGrads<T> backward(const StepTape<T>& tape,
                         const std::vector<BasicTensor<T>>& grad_log_depths,
                         const StateGrads<T>* grad_state_out, ParamGrads<T>& param_grads) const;

  BasicSequenceState<T> initial_state() const { return {}; }

  std::vector<BasicTensor<T>> infer_sequence(const SequenceSample& sample) const;

  // Parameter index of the weight/bias of an encoder or estimator conv.
  int encoder_param(int level, int conv) const { return (level * 2 + conv) * 2; }
  int estimator_param(int level, int conv) const {
    return cfg_.num_levels * 4 + (level * 7 + conv) * 2;
  }

 private:
  struct ConvRef {
    int param;  // weight index; bias is param + 1
    ConvGeometry geometry;
  };

  BasicTensor<T> run_estimator(int level, const BasicTensor<T>& input,
                               std::vector<BasicTensor<T>>* conv_inputs,
                               std::vector<BasicTensor<T>>* pre_activations) const;

  NetworkConfig cfg_;
  std::vector<BasicParamTensor<T>> params_;
  std::vector<std::vector<ConvRef>> encoder_convs_;    // [level][2]
  std::vector<std::vector<ConvRef>> estimator_convs_;  // [level][7]
};

template <typename T>
struct LevelTape {
  BasicTensor<T> features;       // f_t
  BasicTensor<T> up_log;         // log d_up
  std::shared_ptr<const WarpPlan> plan;
  BasicWarpResult<T> warped_features;
  BasicWarpResult<T> warped_depth;
  Shape prev_features_shape;
  Shape prev_depth_shape;
  std::vector<BasicTensor<T>> conv_inputs;      // 7
  std::vector<BasicTensor<T>> pre_activations;  // 6
  BasicTensor<T> raw_log_depth;                 // before clamping
  BasicTensor<T> depth;                         // meters, after clamping
};

template <typename T>
struct StepTape {
  bool self_paired = false;  // t = 0 fallback
  std::vector<BasicTensor<T>> encoder_inputs;   // [level*2 + conv]
  std::vector<BasicTensor<T>> encoder_preacts;  // [level*2 + conv]
  std::vector<LevelTape<T>> levels;
};

// Per-pixel motion conditioning for a level: translation / 2^(level+1) then
// axis-angle rotation.
std::array<double, kMotionChannels> motion_features(const RigidTransform& motion, int level);

}  // namespace mdepth
