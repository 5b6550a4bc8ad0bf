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

#include "mdepth/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include "mdepth/checkpoint.hpp"

namespace mdepth {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw Error(ErrorKind::kBadFormat, "expected a boolean, got '" + v + "'");
}

}  // namespace

int TrainConfig::halving_period() const {
  if (lr_halving_period > 0) return lr_halving_period;
  return std::max(1, static_cast<int>(std::lround(total_iters * 0.3)));
}

void TrainConfig::validate() const {
  if (batch_sequences < 1 || seq_len < 1 || total_iters < 1 || !(base_lr > 0.0) ||
      lr_halving_period < 0 || checkpoint_every < 0 || threads < 1) {
    throw Error(ErrorKind::kInvalidArgument, "training settings must be positive");
  }
  if (loss.alpha < 0.0 || loss.gamma < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "loss weights must be non-negative");
  }
  network.validate();
}

bool TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "batch_sequences") batch_sequences = std::stoi(value);
  else if (key == "seq_len") seq_len = std::stoi(value);
  else if (key == "total_iters") total_iters = std::stoi(value);
  else if (key == "base_lr") base_lr = std::stod(value);
  else if (key == "lr_halving_period") lr_halving_period = std::stoi(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "checkpoint_every") checkpoint_every = std::stoi(value);
  else if (key == "threads") threads = std::stoi(value);
  else if (key == "alpha") loss.alpha = std::stod(value);
  else if (key == "gamma") loss.gamma = std::stod(value);
  else if (key == "per_level_normalization") conventions.per_level_normalization = parse_bool(value);
  else if (key == "finest_level_is_one") conventions.finest_level_is_one = parse_bool(value);
  else return network.set(key, value);
  return true;
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "batch_sequences=" << batch_sequences << '\n'
     << "seq_len=" << seq_len << '\n'
     << "total_iters=" << total_iters << '\n'
     << "base_lr=" << shortest(base_lr) << '\n'
     << "lr_halving_period=" << lr_halving_period << '\n'
     << "seed=" << seed << '\n'
     << "checkpoint_every=" << checkpoint_every << '\n'
     << "threads=" << threads << '\n'
     << "alpha=" << shortest(loss.alpha) << '\n'
     << "gamma=" << shortest(loss.gamma) << '\n'
     << "per_level_normalization=" << (conventions.per_level_normalization ? 1 : 0) << '\n'
     << "finest_level_is_one=" << (conventions.finest_level_is_one ? 1 : 0) << '\n'
     << network.to_text();
  return os.str();
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kBadFormat, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    try {
      if (!cfg.set(key, line.substr(eq + 1))) {
        throw Error(ErrorKind::kBadFormat, "unknown config key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kBadFormat, "bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kMissingFile, "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

double learning_rate(const TrainConfig& cfg, long iter) {
  return std::ldexp(cfg.base_lr, -static_cast<int>(iter / cfg.halving_period()));
}

template <typename T>
double clip_loss(const DepthNetwork<T>& net, const SequenceSample& clip, const LossWeights& w,
                 const LossConventions& conv, ParamGrads<T>* grads,
                 std::vector<FrozenGeometry>* geometry) {
  const std::size_t n = clip.frames.size();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty clip");
  const bool reuse = geometry && geometry->size() == n;
  if (geometry && !reuse) geometry->clear();
  BasicSequenceState<T> state;
  std::vector<StepTape<T>> tapes(grads ? n : 0);
  std::vector<std::vector<BasicTensor<T>>> grad_logs(n);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& frame = clip.frames[t];
    StepOutput<T> out;
    BasicTensor<T> gt;
    StepTape<T>* tape = grads ? &tapes[t] : nullptr;
    const FrozenGeometry* frozen = reuse ? &(*geometry)[t] : nullptr;
    if constexpr (std::is_same_v<T, float>) {
      out = net.step(frame.rgb, frame.motion, clip.intrinsics, state, tape, frozen);
      gt = frame.depth;
    } else {
      out = net.step(frame.rgb.template cast<T>(), frame.motion, clip.intrinsics, state, tape,
                     frozen);
      gt = frame.depth.template cast<T>();
    }
    if (geometry && !reuse) geometry->push_back(out.plans);
    sum += frame_loss_log<T>(out.level_log_depths, gt, w, conv, grads ? &grad_logs[t] : nullptr);
  }
  if (grads) {
    const T inv_n = static_cast<T>(1.0 / static_cast<double>(n));
    for (auto& per_frame : grad_logs) {
      for (auto& g : per_frame) {
        for (auto& v : g.values()) v *= inv_n;
      }
    }
    StateGrads<T> carry;
    for (std::size_t t = n; t-- > 0;) {
      StateGrads<T> next = net.backward(tapes[t], grad_logs[t], t + 1 < n ? &carry : nullptr, *grads);
      carry = std::move(next);
      tapes[t] = StepTape<T>{};
    }
  }
  return sum / static_cast<double>(n);
}

template double clip_loss<float>(const DepthNetwork<float>&, const SequenceSample&,
                                 const LossWeights&, const LossConventions&, ParamGrads<float>*,
                                 std::vector<FrozenGeometry>*);
template double clip_loss<double>(const DepthNetwork<double>&, const SequenceSample&,
                                  const LossWeights&, const LossConventions&, ParamGrads<double>*,
                                  std::vector<FrozenGeometry>*);

TrainResult train(const TrainConfig& cfg, const std::vector<SequenceSample>& dataset,
                  const std::filesystem::path& out_dir, const TrainCallbacks& callbacks) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorKind::kInvalidArgument, "training set is empty");
  for (const auto& s : dataset) {
    if (static_cast<int>(s.size()) < cfg.seq_len) {
      throw Error(ErrorKind::kInvalidArgument,
                  "sequence '" + s.id + "' is shorter than seq_len " + std::to_string(cfg.seq_len));
    }
  }
  std::filesystem::create_directories(out_dir);

  DepthNetwork<float> net(cfg.network, cfg.seed);
  Adam<float> adam;
  const auto params = net.param_ptrs();
  const auto const_params = std::as_const(net).param_ptrs();
  const int batch = cfg.batch_sequences;
  std::vector<ParamGrads<float>> element_grads(batch, net.make_param_grads());

  // Shuffled epochs without replacement.
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const auto next_clip = [&]() {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const SequenceSample& s = dataset[order[cursor++]];
    std::size_t begin = 0;
    if (s.size() > static_cast<std::size_t>(cfg.seq_len)) {
      begin = std::uniform_int_distribution<std::size_t>(0, s.size() - cfg.seq_len)(rng);
    }
    return s.slice(begin, cfg.seq_len);
  };

  std::ofstream csv(out_dir / "loss.csv");
  if (!csv) throw Error(ErrorKind::kMissingFile, "cannot write " + (out_dir / "loss.csv").string());
  csv << "iter,loss,lr\n";

  TrainResult result;
  std::vector<SequenceSample> clips(batch);
  std::vector<double> clip_losses(batch);
  for (long iter = 0; iter < cfg.total_iters; ++iter) {
    for (int b = 0; b < batch; ++b) clips[b] = next_clip();
    const auto run = [&](int b) {
      for (auto& g : element_grads[b]) g.fill(0.0f);
      clip_losses[b] = clip_loss<float>(net, clips[b], cfg.loss, cfg.conventions, &element_grads[b]);
    };
    if (cfg.threads <= 1) {
      for (int b = 0; b < batch; ++b) run(b);
    } else {
      for (int b0 = 0; b0 < batch; b0 += cfg.threads) {
        std::vector<std::thread> workers;
        for (int b = b0; b < std::min(batch, b0 + cfg.threads); ++b) workers.emplace_back(run, b);
        for (auto& w : workers) w.join();
      }
    }

    double loss = 0.0;
    for (double l : clip_losses) loss += l;
    loss /= batch;
    loss += weight_penalty<float>(const_params, cfg.loss.gamma);
    if (!std::isfinite(loss)) {
      std::ofstream dump(out_dir / "nonfinite_batch.txt");
      dump << "iter=" << iter << "\n";
      for (int b = 0; b < batch; ++b) {
        dump << "clip=" << clips[b].id << " loss=" << clip_losses[b] << "\n";
      }
      throw Error(ErrorKind::kNonFiniteLoss, "non-finite loss at iteration " + std::to_string(iter) +
                                                 "; batch written to " +
                                                 (out_dir / "nonfinite_batch.txt").string());
    }

    // Fixed-order reduction over batch elements.
    const float inv_b = 1.0f / static_cast<float>(batch);
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto g = params[p]->grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        float acc = 0.0f;
        for (int b = 0; b < batch; ++b) acc += element_grads[b][p][i];
        g[i] = acc * inv_b;
      }
    }
    add_weight_penalty_grad<float>(params, cfg.loss.gamma);
    const double lr = learning_rate(cfg, iter);
    adam.step(params, lr);

    result.losses.push_back(loss);
    csv << iter << ',' << shortest(loss) << ',' << shortest(lr) << '\n';
    if (callbacks.on_iteration) callbacks.on_iteration(iter, loss, lr);
    if (cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0 &&
        iter + 1 < cfg.total_iters) {
      save_checkpoint(out_dir / ("model_" + std::to_string(iter + 1) + ".ckpt"), net);
    }
  }
  result.checkpoint = out_dir / "model.ckpt";
  save_checkpoint(result.checkpoint, net);
  return result;
}

DepthPredictor network_predictor(const DepthNetwork<float>& net) {
  return [&net](const SequenceSample& s) { return net.infer_sequence(s).back(); };
}

DepthPredictor oracle_predictor() {
  return [](const SequenceSample& s) { return s.frames.back().depth; };
}

DepthPredictor constant_predictor(double depth) {
  return [depth](const SequenceSample& s) {
    const auto& gt = s.frames.back().depth;
    return Tensor(gt.height(), gt.width(), 1, static_cast<float>(depth));
  };
}

MetricReport evaluate(const DepthPredictor& predict, const std::vector<SequenceSample>& dataset,
                      int test_seq_len) {
  if (test_seq_len < 1) throw Error(ErrorKind::kInvalidArgument, "test_seq_len must be >= 1");
  if (dataset.empty()) throw Error(ErrorKind::kInvalidArgument, "evaluation set is empty");
  std::vector<MetricReport> reports;
  reports.reserve(dataset.size());
  for (const auto& s : dataset) {
    if (static_cast<int>(s.size()) < test_seq_len) {
      throw Error(ErrorKind::kInvalidArgument,
                  "sequence '" + s.id + "' is shorter than the test length");
    }
    const SequenceSample tail = s.slice(s.size() - test_seq_len, test_seq_len);
    const Tensor est = predict(tail);
    reports.push_back(eigen_metrics(est, tail.frames.back().depth));
  }
  return mean_report(reports);
}

std::vector<std::vector<double>> rmse_log_grid(const std::vector<DepthPredictor>& predictors,
                                               const std::vector<SequenceSample>& dataset,
                                               const std::vector<int>& test_lengths) {
  std::vector<std::vector<double>> grid;
  for (const auto& p : predictors) {
    std::vector<double> row;
    for (int n : test_lengths) row.push_back(evaluate(p, dataset, n).rmse_log);
    grid.push_back(std::move(row));
  }
  return grid;
}

}  // namespace mdepth
