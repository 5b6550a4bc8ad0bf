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

// Command-line front end: synth, train, eval, infer, gradcheck.
// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdepth/checkpoint.hpp"
#include "mdepth/dataset.hpp"
#include "mdepth/error.hpp"
#include "mdepth/gradcheck.hpp"
#include "mdepth/image_io.hpp"
#include "mdepth/loss_metrics.hpp"
#include "mdepth/synthetic.hpp"
#include "mdepth/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for argument values CLI11 cannot validate on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mdepth::Error(mdepth::ErrorKind::kMissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string spec = "default";
  std::string out;
  int count = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
};

int run_synth(const SynthArgs& a) {
  mdepth::SceneSpec spec = fs::is_regular_file(a.spec)
                               ? mdepth::SceneSpec::from_text(read_text(a.spec))
                               : mdepth::SceneSpec::preset(a.spec);
  for (const auto& kv : a.overrides) {
    const auto [k, v] = split_assignment(kv);
    if (!spec.set(k, v)) throw UsageError("unknown scene key '" + k + "'");
  }
  spec.validate();
  std::vector<mdepth::SequenceSample> samples;
  samples.reserve(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) {
    samples.push_back(mdepth::generate_synthetic(spec, a.seed + static_cast<std::uint64_t>(i)));
  }
  mdepth::save_dataset(a.out, samples);
  std::ofstream(fs::path(a.out) / "scene_spec.txt") << spec.to_text();
  std::printf("wrote %d sequences to %s\n", a.count, a.out.c_str());
  return kExitOk;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  int log_every = 50;
};

int run_train(const TrainArgs& a) {
  mdepth::TrainConfig cfg =
      a.config.empty() ? mdepth::TrainConfig{} : mdepth::TrainConfig::from_file(a.config);
  for (const auto& kv : a.overrides) {
    const auto [k, v] = split_assignment(kv);
    if (!cfg.set(k, v)) throw UsageError("unknown config key '" + k + "'");
  }
  cfg.validate();
  const auto dataset = mdepth::load_dataset(a.data);
  std::printf("training on %zu sequences, %d iterations\n", dataset.size(), cfg.total_iters);
  const auto start = std::chrono::steady_clock::now();
  mdepth::TrainCallbacks cb;
  cb.on_iteration = [&](long iter, double loss, double lr) {
    if (a.log_every > 0 && (iter % a.log_every == 0 || iter + 1 == cfg.total_iters)) {
      const double s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("iter %6ld  loss %.5f  lr %.3g  %.1fs\n", iter, loss, lr, s);
      std::fflush(stdout);
    }
  };
  const auto result = mdepth::train(cfg, dataset, a.out, cb);
  std::printf("checkpoint %s\n", result.checkpoint.string().c_str());
  return kExitOk;
}

// --- eval ----------------------------------------------------------------

// "oracle", "constant[:meters]" or a checkpoint path.
mdepth::DepthPredictor make_predictor(const std::string& spec,
                                      std::optional<mdepth::DepthNetwork<float>>& holder) {
  if (spec == "oracle") return mdepth::oracle_predictor();
  if (spec.rfind("constant", 0) == 0) {
    double depth = mdepth::NetworkConfig{}.d_init;
    if (spec.size() > 8) {
      if (spec[8] != ':') throw UsageError("expected constant:<meters>");
      try {
        depth = std::stod(spec.substr(9));
      } catch (const std::exception&) {
        throw UsageError("bad constant depth '" + spec.substr(9) + "'");
      }
    }
    return mdepth::constant_predictor(depth);
  }
  holder.emplace(mdepth::load_checkpoint(spec));
  return mdepth::network_predictor(*holder);
}

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::vector<int> seq_lens{1};
};

int run_eval(const EvalArgs& a) {
  std::optional<mdepth::DepthNetwork<float>> net;
  const auto predict = make_predictor(a.ckpt, net);
  const auto dataset = mdepth::load_dataset(a.data);
  std::vector<std::pair<std::string, mdepth::MetricReport>> rows;
  std::printf("seq_len,%s\n", mdepth::MetricReport::csv_header().c_str());
  for (int n : a.seq_lens) {
    const auto report = mdepth::evaluate(predict, dataset, n);
    std::printf("%d,%s\n", n, report.csv_row().c_str());
    rows.emplace_back("N=" + std::to_string(n), report);
  }
  std::printf("\n");
  mdepth::print_metric_table(std::cout, rows);
  return kExitOk;
}

// --- infer ---------------------------------------------------------------

struct InferArgs {
  std::string ckpt;
  std::string data;
  std::string out;
  bool png = false;
};

int run_infer(const InferArgs& a) {
  const auto net = mdepth::load_checkpoint(a.ckpt);
  const auto range = net.config().depth_range;
  mdepth::DatasetReader reader(a.data);
  mdepth::SequenceSample sample;
  std::size_t frames = 0;
  while (reader.next(sample)) {
    const auto depths = net.infer_sequence(sample);
    const fs::path dir = fs::path(a.out) / sample.id;
    fs::create_directories(dir / "depth");
    if (a.png) fs::create_directories(dir / "color");
    for (std::size_t t = 0; t < depths.size(); ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu", t);
      mdepth::write_pfm(dir / "depth" / (std::string(name) + ".pfm"), depths[t]);
      if (a.png) {
        mdepth::write_png_rgb(dir / "color" / (std::string(name) + ".png"),
                              mdepth::colorize_depth(depths[t], range.min, range.max));
      }
    }
    frames += depths.size();
  }
  std::printf("wrote %zu depth maps for %zu sequences to %s\n", frames, reader.size(),
              a.out.c_str());
  return kExitOk;
}

// --- gradcheck -----------------------------------------------------------

int run_gradcheck(const std::string& module, std::uint64_t seed) {
  const auto& suites = mdepth::gradcheck_suites();
  if (!module.empty() && std::find(suites.begin(), suites.end(), module) == suites.end()) {
    std::string known;
    for (const auto& s : suites) known += " " + s;
    throw UsageError("unknown module '" + module + "'; known:" + known);
  }
  const auto start = std::chrono::steady_clock::now();
  const auto results = mdepth::run_gradcheck(module, seed);
  bool ok = true;
  std::printf("%-28s %12s %10s %9s %8s\n", "suite", "max_rel_err", "tolerance", "checked",
              "seconds");
  for (const auto& r : results) {
    std::printf("%-28s %12.3e %10.1e %9ld %8.2f  %s\n", r.name.c_str(), r.max_rel_error,
                r.tolerance, r.checked, r.seconds, r.passed() ? "PASS" : "FAIL");
    ok = ok && r.passed();
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("total %.2fs\n", total);
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motiondepth: depth from monocular motion"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render synthetic sequences");
  synth_cmd->add_option("--spec", synth.spec, "Scene spec file or preset (default, toy, plane)")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output dataset root")->required();
  synth_cmd->add_option("--count", synth.count, "Number of sequences")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Seed of the first sequence")->capture_default_str();
  synth_cmd->add_option("--set", synth.overrides, "Scene key=value override (repeatable)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a network");
  train_cmd->add_option("--data", train.data, "Dataset root")->required();
  train_cmd->add_option("--config", train.config, "key=value config file")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--set", train.overrides, "Config key=value override (repeatable)");
  train_cmd->add_option("--log-every", train.log_every, "Progress interval (0 = quiet)")
      ->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score the last frame of each sequence");
  eval_cmd->add_option("--ckpt", eval.ckpt, "Checkpoint path, 'oracle' or 'constant[:meters]'")
      ->required();
  eval_cmd->add_option("--data", eval.data, "Dataset root")->required();
  eval_cmd->add_option("--seq-len", eval.seq_lens, "Frames fed per sequence (comma list)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer", "Write per-frame depth maps");
  infer_cmd->add_option("--ckpt", infer.ckpt, "Checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  infer_cmd->add_option("--data", infer.data, "Dataset root")->required();
  infer_cmd->add_option("--out", infer.out, "Output root")->required();
  infer_cmd->add_flag("--png", infer.png, "Also write colorized PNGs");

  std::string module;
  std::uint64_t gc_seed = 1;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  gc_cmd->add_option("--module", module, "Run a single suite");
  gc_cmd->add_option("--seed", gc_seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(train);
    if (*eval_cmd) return run_eval(eval);
    if (*infer_cmd) return run_infer(infer);
    if (*gc_cmd) return run_gradcheck(module, gc_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const mdepth::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
