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

#include "mdepth/network.hpp"

#include <cmath>
#include <sstream>

namespace mdepth {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

template <typename T>
void add_into(BasicTensor<T>& dst, const BasicTensor<T>& src) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst = src;
    return;
  }
  require_shape(src.shape(), dst.shape(), "gradient accumulation");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}


}  // namespace

// ---------------------------------------------------------------------------
// NetworkConfig
// ---------------------------------------------------------------------------

void NetworkConfig::validate() const {
  if (num_levels < 1 || num_levels > static_cast<int>(encoder_channels.size())) {
    throw Error(ErrorKind::kInvalidArgument, "num_levels must be in [1, encoder levels]");
  }
  for (int c : encoder_channels) {
    if (c < 1) throw Error(ErrorKind::kInvalidArgument, "encoder channels must be positive");
  }
  if (estimator_channels.size() != 7 || estimator_channels.back() != 1) {
    throw Error(ErrorKind::kInvalidArgument, "estimator needs 7 layers ending in 1 channel");
  }
  if (cost_radius < 0) throw Error(ErrorKind::kInvalidArgument, "cost_radius must be >= 0");
  if (!(depth_range.min > 0.0) || !(depth_range.max > depth_range.min)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid depth range");
  }
  if (!(d_init > 0.0)) throw Error(ErrorKind::kInvalidArgument, "d_init must be positive");
}

int NetworkConfig::estimator_input_channels(int level) const {
  const int side = 2 * cost_radius + 1;
  return encoder_channels.at(level) + side * side + 1 + 1 + 2 + kMotionChannels;
}

std::string NetworkConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "num_levels=" << num_levels << '\n'
     << "encoder_channels=" << join(encoder_channels) << '\n'
     << "estimator_channels=" << join(estimator_channels) << '\n'
     << "cost_radius=" << cost_radius << '\n'
     << "d_init=" << d_init << '\n'
     << "leaky_slope=" << leaky_slope << '\n'
     << "d_min=" << depth_range.min << '\n'
     << "d_max=" << depth_range.max << '\n'
     << "transform_warped_depth=" << (transform_warped_depth ? 1 : 0) << '\n';
  return os.str();
}

bool NetworkConfig::set(const std::string& key, const std::string& value) {
  if (key == "num_levels") num_levels = std::stoi(value);
  else if (key == "encoder_channels") encoder_channels = parse_int_list(value);
  else if (key == "estimator_channels") estimator_channels = parse_int_list(value);
  else if (key == "cost_radius") cost_radius = std::stoi(value);
  else if (key == "d_init") d_init = std::stod(value);
  else if (key == "leaky_slope") leaky_slope = std::stod(value);
  else if (key == "d_min") depth_range.min = std::stod(value);
  else if (key == "d_max") depth_range.max = std::stod(value);
  else if (key == "transform_warped_depth") transform_warped_depth = std::stoi(value) != 0;
  else return false;
  return true;
}

NetworkConfig NetworkConfig::from_text(const std::string& text) {
  NetworkConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kBadFormat, "config line: " + line);
    if (!cfg.set(line.substr(0, eq), line.substr(eq + 1))) {
      throw Error(ErrorKind::kBadFormat, "unknown network key: " + line.substr(0, eq));
    }
  }
  cfg.validate();
  return cfg;
}

std::array<double, kMotionChannels> motion_features(const RigidTransform& motion, int level) {
  const double scale = std::ldexp(1.0, -(level + 1));
  const Vec3 aa = motion.axis_angle();
  return {motion.translation.x() * scale, motion.translation.y() * scale,
          motion.translation.z() * scale, aa.x(), aa.y(), aa.z()};
}

// ---------------------------------------------------------------------------
// DepthNetwork
// ---------------------------------------------------------------------------

template <typename T>
DepthNetwork<T>::DepthNetwork(NetworkConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int m = cfg_.num_levels;
  const auto add_conv = [&](const std::string& name, int cin, int cout, int stride) {
    const int idx = static_cast<int>(params_.size());
    params_.emplace_back(name + ".weight", std::vector<int>{3, 3, cin, cout}, false);
    params_.emplace_back(name + ".bias", std::vector<int>{cout}, true);
    he_init<T>(params_[idx].value.values(), 9 * cin, mix_seed(seed, idx));
    return ConvRef{idx, ConvGeometry{cin, cout, stride}};
  };
  encoder_convs_.resize(m);
  int cin = 3;
  for (int l = 0; l < m; ++l) {
    const int c = cfg_.encoder_channels[l];
    const std::string base = "encoder." + std::to_string(l + 1);
    encoder_convs_[l].push_back(add_conv(base + ".conv0", cin, c, 2));
    encoder_convs_[l].push_back(add_conv(base + ".conv1", c, c, 1));
    cin = c;
  }
  estimator_convs_.resize(m);
  for (int l = 0; l < m; ++l) {
    int in = cfg_.estimator_input_channels(l);
    const std::string base = "estimator." + std::to_string(l + 1);
    for (int k = 0; k < 7; ++k) {
      const int out = cfg_.estimator_channels[k];
      estimator_convs_[l].push_back(add_conv(base + ".conv" + std::to_string(k), in, out, 1));
      in = out;
    }
    // The last layer starts out predicting the prior depth everywhere.
    auto& last_bias = params_[estimator_convs_[l].back().param + 1];
    last_bias.value.fill(static_cast<T>(std::log(
        std::clamp(cfg_.d_init, cfg_.depth_range.min, cfg_.depth_range.max))));
  }
}

template <typename T>
std::vector<BasicParamTensor<T>*> DepthNetwork<T>::param_ptrs() {
  std::vector<BasicParamTensor<T>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<const BasicParamTensor<T>*> DepthNetwork<T>::param_ptrs() const {
  std::vector<const BasicParamTensor<T>*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

template <typename T>
ParamGrads<T> DepthNetwork<T>::make_param_grads() const {
  ParamGrads<T> g;
  for (const auto& p : params_) g.emplace_back(p.value.shape());
  return g;
}

template <typename T>
std::vector<BasicTensor<T>> DepthNetwork<T>::encode(const BasicTensor<T>& image) const {
  const int m = cfg_.num_levels;
  const int div = 1 << m;
  if (image.channels() != 3 || image.height() % div != 0 || image.width() % div != 0) {
    throw Error(ErrorKind::kShapeMismatch, "encoder input " + to_string(image.shape()) +
                                               " must be RGB with sides divisible by " +
                                               std::to_string(div));
  }
  const T slope = static_cast<T>(cfg_.leaky_slope);
  std::vector<BasicTensor<T>> feats;
  BasicTensor<T> x = image;
  for (int l = 0; l < m; ++l) {
    for (int c = 0; c < 2; ++c) {
      const ConvRef& conv = encoder_convs_[l][c];
      x = leaky_relu(conv3x3_forward<T>(x, params_[conv.param].value.values(),
                                        params_[conv.param + 1].value.values(), conv.geometry),
                     slope);
    }
    feats.push_back(x);
  }
  return feats;
}

template <typename T>
BasicTensor<T> DepthNetwork<T>::run_estimator(int level, const BasicTensor<T>& input,
                                              std::vector<BasicTensor<T>>* conv_inputs,
                                              std::vector<BasicTensor<T>>* pre_activations) const {
  const T slope = static_cast<T>(cfg_.leaky_slope);
  BasicTensor<T> x = input;
  for (int k = 0; k < 7; ++k) {
    const ConvRef& conv = estimator_convs_[level][k];
    BasicTensor<T> z = conv3x3_forward<T>(x, params_[conv.param].value.values(),
                                          params_[conv.param + 1].value.values(), conv.geometry);
    if (conv_inputs) conv_inputs->push_back(std::move(x));
    if (k == 6) return z;
    x = leaky_relu(z, slope);
    if (pre_activations) pre_activations->push_back(std::move(z));
  }
  return x;  // unreachable
}

template <typename T>
BasicTensor<T> DepthNetwork<T>::estimate_depth_level(int level, const BasicTensor<T>& input) const {
  if (input.channels() != cfg_.estimator_input_channels(level)) {
    throw Error(ErrorKind::kShapeMismatch, "estimator input channels");
  }
  return log_depth_decode(run_estimator(level, input, nullptr, nullptr), cfg_.depth_range);
}

namespace {

template <typename T>
BasicTensor<T> assemble_input(const NetworkConfig& cfg, int level, const BasicTensor<T>& features,
                              const BasicTensor<T>& cost, const BasicTensor<T>& warped_log_depth,
                              const BasicTensor<T>& up_log, const RigidTransform& motion) {
  const int h = features.height(), w = features.width();
  BasicTensor<T> aux(h, w, 2 + kMotionChannels);
  const auto mf = motion_features(motion, level);
  for (int y = 0; y < h; ++y) {
    const T gj = h > 1 ? static_cast<T>(2.0 * y / (h - 1) - 1.0) : T(0);
    for (int x = 0; x < w; ++x) {
      T* p = aux.pixel(y, x);
      p[0] = w > 1 ? static_cast<T>(2.0 * x / (w - 1) - 1.0) : T(0);
      p[1] = gj;
      for (int c = 0; c < kMotionChannels; ++c) p[2 + c] = static_cast<T>(mf[c]);
    }
  }
  const BasicTensor<T>* parts[] = {&features, &cost, &warped_log_depth, &up_log, &aux};
  BasicTensor<T> out = concat_channels<T>(parts);
  if (out.channels() != cfg.estimator_input_channels(level)) {
    throw Error(ErrorKind::kShapeMismatch, "estimator input assembly");
  }
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> DepthNetwork<T>::preprocess_level(int level, const BasicTensor<T>& features,
                                                 const BasicLevelState<T>& prev,
                                                 const BasicTensor<T>& d_up_log,
                                                 const RigidTransform& motion,
                                                 const Intrinsics& k_level) const {
  const Shape level_shape{features.height(), features.width(), 1};
  require_shape(d_up_log.shape(), level_shape, "upsampled depth");
  require_shape(prev.depth.shape(), level_shape, "previous depth");
  require_shape(prev.features.shape(), features.shape(), "previous features");
  BasicTensor<T> d_up(d_up_log.shape());
  for (std::size_t i = 0; i < d_up.size(); ++i) d_up[i] = std::exp(d_up_log[i]);
  const WarpPlan plan(d_up, motion, k_level);
  const auto fw = plan.apply(prev.features, false);
  const auto dw = plan.apply(prev.depth, cfg_.transform_warped_depth);
  const auto cv = cost_volume(features, fw.warped, cfg_.cost_radius);
  return assemble_input(cfg_, level, features, cv, log_depth_encode(dw.warped, cfg_.depth_range),
                        d_up_log, motion);
}

template <typename T>
StepOutput<T> DepthNetwork<T>::step(const BasicTensor<T>& image, const RigidTransform& motion,
                                    const Intrinsics& k, BasicSequenceState<T>& state,
                                    StepTape<T>* tape, const FrozenGeometry* frozen) const {
  const int m = cfg_.num_levels;
  const T slope = static_cast<T>(cfg_.leaky_slope);
  const int div = 1 << m;
  if (image.channels() != 3 || image.height() % div != 0 || image.width() % div != 0) {
    throw Error(ErrorKind::kShapeMismatch, "step input " + to_string(image.shape()) +
                                               " must be RGB with sides divisible by " +
                                               std::to_string(div));
  }
  if (image.height() != k.height || image.width() != k.width) {
    throw Error(ErrorKind::kShapeMismatch, "image size does not match intrinsics");
  }

  // Encoder.
  std::vector<BasicTensor<T>> feats;
  {
    BasicTensor<T> x = image;
    for (int l = 0; l < m; ++l) {
      for (int c = 0; c < 2; ++c) {
        const ConvRef& conv = encoder_convs_[l][c];
        BasicTensor<T> z = conv3x3_forward<T>(x, params_[conv.param].value.values(),
                                              params_[conv.param + 1].value.values(),
                                              conv.geometry);
        BasicTensor<T> a = leaky_relu(z, slope);
        if (tape) {
          tape->encoder_inputs.push_back(std::move(x));
          tape->encoder_preacts.push_back(std::move(z));
        }
        x = std::move(a);
      }
      feats.push_back(x);
    }
  }

  const bool self_paired = state.levels.empty();
  const RigidTransform used_motion = self_paired ? RigidTransform::identity() : motion;
  if (self_paired) {
    state.levels.resize(m);
    for (int l = 0; l < m; ++l) {
      state.levels[l].features = feats[l];
      state.levels[l].depth = BasicTensor<T>(feats[l].height(), feats[l].width(), 1,
                                             static_cast<T>(cfg_.d_init));
    }
  } else if (static_cast<int>(state.levels.size()) != m) {
    throw Error(ErrorKind::kShapeMismatch, "sequence state has the wrong number of levels");
  }
  if (frozen && static_cast<int>(frozen->size()) != m) {
    throw Error(ErrorKind::kInvalidArgument, "frozen geometry has the wrong number of levels");
  }
  if (tape) {
    tape->self_paired = self_paired;
    tape->levels.resize(m);
  }

  const T lo = static_cast<T>(std::log(cfg_.depth_range.min));
  const T hi = static_cast<T>(std::log(cfg_.depth_range.max));
  StepOutput<T> out;
  out.level_depths.resize(m);
  out.level_log_depths.resize(m);
  out.plans.resize(m);
  for (int l = m - 1; l >= 0; --l) {
    const int h = feats[l].height(), w = feats[l].width();
    const Intrinsics kl = k.at_level(l + 1);
    const auto& prev = state.levels[l];
    require_shape(prev.features.shape(), feats[l].shape(), "previous features");
    require_shape(prev.depth.shape(), Shape{h, w, 1}, "previous depth");

    BasicTensor<T> up_log =
        l == m - 1
            ? BasicTensor<T>(h, w, 1,
                             static_cast<T>(std::log(std::clamp(
                                 cfg_.d_init, cfg_.depth_range.min, cfg_.depth_range.max))))
            : resize_bilinear(out.level_log_depths[l + 1], h, w);
    BasicTensor<T> d_up(up_log.shape());
    for (std::size_t i = 0; i < d_up.size(); ++i) d_up[i] = std::exp(up_log[i]);

    std::shared_ptr<const WarpPlan> plan =
        frozen ? (*frozen)[l] : std::make_shared<const WarpPlan>(d_up, used_motion, kl);
    auto fw = plan->apply(prev.features, false);
    auto dw = plan->apply(prev.depth, cfg_.transform_warped_depth);
    const auto cv = cost_volume(feats[l], fw.warped, cfg_.cost_radius);
    const auto input = assemble_input(cfg_, l, feats[l], cv,
                                      log_depth_encode(dw.warped, cfg_.depth_range), up_log,
                                      used_motion);

    LevelTape<T>* lt = tape ? &tape->levels[l] : nullptr;
    BasicTensor<T> raw = run_estimator(l, input, lt ? &lt->conv_inputs : nullptr,
                                       lt ? &lt->pre_activations : nullptr);
    BasicTensor<T> log_d(raw.shape());
    BasicTensor<T> depth(raw.shape());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      log_d[i] = std::clamp(raw[i], lo, hi);
      depth[i] = std::exp(log_d[i]);
    }
    check_finite(depth.values(), "depth estimator output");
    out.level_depths[l] = depth;
    out.level_log_depths[l] = std::move(log_d);
    out.plans[l] = plan;

    if (lt) {
      lt->features = feats[l];
      lt->up_log = std::move(up_log);
      lt->plan = plan;
      lt->warped_features = std::move(fw);
      lt->warped_depth = std::move(dw);
      lt->prev_features_shape = prev.features.shape();
      lt->prev_depth_shape = prev.depth.shape();
      lt->raw_log_depth = std::move(raw);
      lt->depth = std::move(depth);
    }
  }

  {
    const auto& fine = out.level_log_depths[0];
    const BasicTensor<T> full_log = resize_bilinear(fine, image.height(), image.width());
    out.depth = BasicTensor<T>(full_log.shape());
    for (std::size_t i = 0; i < full_log.size(); ++i) out.depth[i] = std::exp(full_log[i]);
  }

  for (int l = 0; l < m; ++l) {
    state.levels[l].features = std::move(feats[l]);
    state.levels[l].depth = out.level_depths[l];
  }
  ++state.timestep;
  return out;
}

template <typename T>
StateGrads<T> DepthNetwork<T>::backward(const StepTape<T>& tape,
                                        const std::vector<BasicTensor<T>>& grad_log_depths,
                                        const StateGrads<T>* grad_state_out,
                                        ParamGrads<T>& param_grads) const {
  const int m = cfg_.num_levels;
  const T slope = static_cast<T>(cfg_.leaky_slope);
  const T lo = static_cast<T>(std::log(cfg_.depth_range.min));
  const T hi = static_cast<T>(std::log(cfg_.depth_range.max));
  const T dlo = static_cast<T>(cfg_.depth_range.min);
  const T dhi = static_cast<T>(cfg_.depth_range.max);
  const int side = 2 * cfg_.cost_radius + 1;
  if (static_cast<int>(tape.levels.size()) != m) {
    throw Error(ErrorKind::kInvalidArgument, "tape does not match the network");
  }
  if (param_grads.size() != params_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "parameter gradient buffer size");
  }

  std::vector<BasicTensor<T>> grad_log(m);   // d/d(clamped log depth)
  std::vector<BasicTensor<T>> grad_feat(m);  // d/d(encoder features)
  for (int l = 0; l < m; ++l) {
    const auto& lt = tape.levels[l];
    grad_log[l] = BasicTensor<T>(lt.depth.shape());
    if (l < static_cast<int>(grad_log_depths.size())) add_into(grad_log[l], grad_log_depths[l]);
    grad_feat[l] = BasicTensor<T>(lt.features.shape());
    if (grad_state_out) {
      if (!grad_state_out->depth.empty() && !grad_state_out->depth[l].empty()) {
        const auto& gd = grad_state_out->depth[l];
        require_shape(gd.shape(), lt.depth.shape(), "state depth gradient");
        for (std::size_t i = 0; i < gd.size(); ++i) grad_log[l][i] += gd[i] * lt.depth[i];
      }
      if (!grad_state_out->features.empty()) add_into(grad_feat[l], grad_state_out->features[l]);
    }
  }

  StateGrads<T> grad_prev;
  grad_prev.features.resize(m);
  grad_prev.depth.resize(m);

  // Decoder, fine to coarse (reverse of the forward order).
  for (int l = 0; l < m; ++l) {
    const auto& lt = tape.levels[l];
    BasicTensor<T> g(lt.raw_log_depth.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T r = lt.raw_log_depth[i];
      g[i] = (r > lo && r < hi) ? grad_log[l][i] : T(0);
    }
    for (int k = 6; k >= 0; --k) {
      const ConvRef& conv = estimator_convs_[l][k];
      if (k < 6) g = leaky_relu_backward(lt.pre_activations[k], g, slope);
      g = conv3x3_backward<T>(lt.conv_inputs[k], params_[conv.param].value.values(), g,
                              conv.geometry, param_grads[conv.param].values(),
                              param_grads[conv.param + 1].values(), true);
    }
    // g is now d/d(estimator input); split it by the assembly order.
    const int c_feat = lt.features.channels();
    const int c_cost = side * side;
    add_into(grad_feat[l], slice_channels(g, 0, c_feat));
    const auto cv_grads = cost_volume_backward(lt.features, lt.warped_features.warped,
                                               cfg_.cost_radius, slice_channels(g, c_feat, c_cost));
    add_into(grad_feat[l], cv_grads.f1);
    grad_prev.features[l] = lt.plan->backward(cv_grads.f2, lt.warped_features.validity,
                                              lt.prev_features_shape, false);

    BasicTensor<T> g_dw = slice_channels(g, c_feat + c_cost, 1);
    const auto& dw = lt.warped_depth.warped;
    for (std::size_t i = 0; i < g_dw.size(); ++i) {
      g_dw[i] = (dw[i] > dlo && dw[i] < dhi) ? g_dw[i] / dw[i] : T(0);
    }
    grad_prev.depth[l] = lt.plan->backward(g_dw, lt.warped_depth.validity, lt.prev_depth_shape,
                                           cfg_.transform_warped_depth);

    if (l + 1 < m) {
      const BasicTensor<T> g_up = slice_channels(g, c_feat + c_cost + 1, 1);
      add_into(grad_log[l + 1],
               resize_bilinear_backward(g_up, tape.levels[l + 1].depth.shape()));
    }
  }

  if (tape.self_paired) {
    // Previous features were the current ones; previous depth was a constant.
    for (int l = 0; l < m; ++l) add_into(grad_feat[l], grad_prev.features[l]);
    grad_prev.features.clear();
    grad_prev.depth.clear();
  }

  // Encoder, coarse to fine.
  for (int l = m - 1; l >= 0; --l) {
    BasicTensor<T> g = std::move(grad_feat[l]);
    for (int c = 1; c >= 0; --c) {
      const int idx = l * 2 + c;
      const ConvRef& conv = encoder_convs_[l][c];
      g = leaky_relu_backward(tape.encoder_preacts[idx], g, slope);
      g = conv3x3_backward<T>(tape.encoder_inputs[idx], params_[conv.param].value.values(), g,
                              conv.geometry, param_grads[conv.param].values(),
                              param_grads[conv.param + 1].values(), idx > 0);
    }
    if (l > 0) add_into(grad_feat[l - 1], g);
  }
  return grad_prev;
}

template <typename T>
std::vector<BasicTensor<T>> DepthNetwork<T>::infer_sequence(const SequenceSample& sample) const {
  if (sample.frames.empty()) throw Error(ErrorKind::kInvalidArgument, "empty sequence");
  BasicSequenceState<T> state;
  std::vector<BasicTensor<T>> out;
  out.reserve(sample.frames.size());
  for (const auto& f : sample.frames) {
    if constexpr (std::is_same_v<T, float>) {
      out.push_back(step(f.rgb, f.motion, sample.intrinsics, state).depth);
    } else {
      out.push_back(step(f.rgb.template cast<T>(), f.motion, sample.intrinsics, state).depth);
    }
  }
  return out;
}

template class DepthNetwork<float>;
template class DepthNetwork<double>;

}  // namespace mdepth
