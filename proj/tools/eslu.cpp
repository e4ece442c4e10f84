// eslu/tools/eslu.cpp

// Copyright 2026 The eslu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command line front end: synth | prepare | train | eval | predict | gradcheck.
//
// Exit codes: 0 ok, 1 configuration, 2 I/O, 3 validation, 4 numeric check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eslu/config.hpp"
#include "eslu/error.hpp"
#include "eslu/gradcheck_suite.hpp"
#include "eslu/pipeline.hpp"
#include "eslu/synth.hpp"

namespace fs = std::filesystem;
using namespace eslu;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
};

nlohmann::json load_config_json(const Globals& g) {
  if (g.config.empty()) return nlohmann::json::object();
  std::ifstream in(g.config);
  if (!in) throw IoError("cannot open config " + g.config);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(g.config + ": invalid JSON: " + ex.what());
  }
}

/// Validates the whole document before any work is done.
ExperimentConfig load_config(const Globals& g) {
  return experiment_config_from_json(load_config_json(g));
}

bool nonempty_dir(const fs::path& p) {
  return fs::exists(p) && (!fs::is_directory(p) || !fs::is_empty(p));
}

void check_clobber(const fs::path& p, const Globals& g) {
  if (!g.force && (fs::is_directory(p) ? nonempty_dir(p) : fs::exists(p))) {
    throw IoError(p.string() + " exists (use --force to overwrite)");
  }
}

/// Removes previous outputs named in `names` under `dir`.
void clear_outputs(const fs::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) fs::remove_all(dir / n);
}

std::string model_name(const SluConfig& c) {
  std::string name = c.encoders.size() > 1 ? "Ensemble end-to-end SLU" : "End-to-end SLU";
  return name + (c.head == PoolingHead::kMaxPool ? " with max-pooling" : " with attention layer");
}

int cmd_synth(const Globals& g, int n, const std::string& out, const std::string& preset,
              std::optional<double> clip_seconds) {
  const nlohmann::json j = load_config_json(g);
  const ExperimentConfig cfg = experiment_config_from_json(j);
  (void)cfg;
  SynthSpec spec = SynthSpec::preset(preset);
  if (j.contains("synth")) spec = synth_spec_from_json(j["synth"], spec);
  if (clip_seconds) spec.clip_seconds = *clip_seconds;
  spec.validate();
  if (n < 2) throw ConfigError("synth: --n must be >= 2, got " + std::to_string(n));

  check_clobber(out, g);
  clear_outputs(out, {"wav", "wav.scp", "utt2spk", "spk2utt", "labels", "events.gt"});
  const SynthSummary s = generate_dataset(n, spec, out, g.seed.value_or(0));
  if (!g.quiet) {
    std::printf("%d positive / %d negative\n", s.positives, s.negatives);
    const fs::path root = fs::absolute(out).lexically_normal();
    std::printf("wavs: %s\nmanifest: %s/{wav.scp,utt2spk,spk2utt,labels}\nevents: %s\n",
                (root / "wav").c_str(), root.c_str(), (root / "events.gt").c_str());
  }
  return 0;
}

int cmd_prepare(const Globals& g, const std::string& data, const std::string& out,
                const std::string& augment, std::optional<int> shards,
                std::optional<int> train_shards) {
  const ExperimentConfig cfg = load_config(g);
  PrepareOptions opt;
  opt.fbank = cfg.model.fbank;
  opt.plan = cfg.shards;
  if (shards) opt.plan.shards_per_class = *shards;
  if (train_shards) opt.plan.train_shards = *train_shards;
  if (shards || train_shards) opt.plan.test_shards = opt.plan.shards_per_class - opt.plan.train_shards;
  if (g.seed) opt.plan.seed = *g.seed;
  opt.plan.validate();
  opt.augment_mode = augment_mode_from_string(augment);
  opt.augment = cfg.augment;
  opt.seed = g.seed.value_or(0);

  if (!fs::is_directory(data)) throw IoError("data directory " + data + " not found");
  check_clobber(out, g);
  clear_outputs(out, {"ark", "train.scp", "test.scp", "labels", "utt2spk", "events.gt",
                      "prepare.json"});
  const PrepareSummary s = prepare_features(data, out, opt);
  if (!g.quiet) {
    std::printf("%d archives, train %zu utts, test %zu utts\n", s.archives, s.train_utts,
                s.test_utts);
  }
  return 0;
}

int cmd_train(const Globals& g, const std::string& features, const std::string& out_ckpt,
              const std::string& resume, std::optional<int> epochs,
              std::optional<std::uint64_t> max_steps) {
  const ExperimentConfig cfg = load_config(g);
  check_clobber(out_ckpt, g);

  std::unique_ptr<SluModel> model;
  TrainConfig tc = cfg.train;
  if (!resume.empty()) {
    model = SluModel::load(resume);
    if (model->train_config) tc = *model->train_config;
  } else {
    if (g.seed) tc.seed = *g.seed;
  }
  if (epochs) tc.epochs = *epochs;
  if (max_steps) tc.max_steps = *max_steps;
  tc.validate();
  if (!model) model = std::make_unique<SluModel>(cfg.model, tc.seed);
  model->train_config = tc;

  const std::vector<TrainingExample> data = load_split(features, "train");
  Trainer trainer(*model, tc);
  trainer.run(data, [&](const EpochStats& s) {
    if (!g.quiet) {
      std::printf("epoch %d loss %.6f train_f1 %.4f steps %llu\n", s.epoch + 1, s.mean_loss,
                  s.train_f1, static_cast<unsigned long long>(s.steps));
      std::fflush(stdout);
    }
  });
  model->save(out_ckpt);
  if (!g.quiet) {
    std::printf("saved %s at step %llu\n", out_ckpt.c_str(),
                static_cast<unsigned long long>(model->step()));
  }
  return 0;
}

int cmd_eval(const Globals& g, const std::string& features, const std::string& ckpt,
             const std::string& split, const std::string& json_out) {
  if (!g.config.empty()) load_config(g);
  const auto model = SluModel::load(ckpt);
  const std::vector<TrainingExample> data = load_split(features, split);
  const EvaluationResult r = evaluate(*model, data);
  std::fputs(format_table(r.report, model_name(model->config())).c_str(), stdout);
  if (!json_out.empty()) {
    check_clobber(json_out, g);
    std::ofstream out(json_out, std::ios::trunc);
    out << to_json(r.report).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + json_out);
  }
  return 0;
}

int cmd_predict(const Globals& g, const std::string& wav, const std::string& ckpt) {
  if (!g.config.empty()) load_config(g);
  const auto model = SluModel::load(ckpt);
  const Waveform w = read_wav(wav);
  const Prediction p = predict(*model, w, fs::path(wav).stem().string());
  std::printf("label=%d scores=", p.label);
  for (Eigen::Index i = 0; i < p.scores.size(); ++i) {
    std::printf("%s%.6f", i ? "," : "", p.scores(i));
  }
  if (p.event_time_s) std::printf(" event_time=%.2f", *p.event_time_s);
  std::printf("\n");
  return 0;
}

int cmd_gradcheck(const Globals& g, int seeds) {
  if (!g.config.empty()) load_config(g);
  if (seeds < 1) throw ConfigError("gradcheck: --seeds must be >= 1");
  const std::uint64_t base = g.seed.value_or(0);
  std::map<std::string, LayerCheck> worst;
  std::vector<std::string> order;
  for (int s = 0; s < seeds; ++s) {
    for (const LayerCheck& c : run_gradcheck_suite(base + static_cast<std::uint64_t>(s))) {
      if (!worst.count(c.layer)) order.push_back(c.layer);
      if (c.max_rel_error >= worst[c.layer].max_rel_error) worst[c.layer] = c;
    }
  }
  bool ok = true;
  for (const auto& name : order) {
    const LayerCheck& c = worst[name];
    const bool pass = c.max_rel_error < kGradcheckTolerance;
    ok = ok && pass;
    std::printf("%-14s max_rel_err %.3e  %s  (%s)\n", name.c_str(), c.max_rel_error,
                pass ? "ok" : "FAIL", c.worst_parameter.c_str());
  }
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end spoken language understanding toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "JSON experiment config");
  auto* seed_opt = app.add_option("--seed", seed, "base random seed");
  app.add_flag("--force", g.force, "overwrite existing outputs");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  int n = 0;
  std::string out, preset = "easy";
  std::optional<double> clip_seconds;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--n", n, "number of clips")->required();
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--preset", preset, "easy or hard")->check(CLI::IsMember({"easy", "hard"}));
  synth->add_option("--clip-seconds", clip_seconds, "clip length override");

  std::string data, augment = "none";
  std::optional<int> shards, train_shards;
  auto* prepare = app.add_subcommand("prepare", "features and sharded archives");
  prepare->add_option("--data", data, "manifest directory")->required();
  prepare->add_option("--out", out, "output directory")->required();
  prepare->add_option("--augment", augment, "none, noise, reverb or both");
  prepare->add_option("--shards", shards, "shards per class (default 32)");
  prepare->add_option("--train-shards", train_shards, "training shards per class (default 30)");

  std::string features, out_ckpt, resume, ckpt, split = "test", json_out, wav;
  std::optional<int> epochs;
  std::optional<std::uint64_t> max_steps;
  auto* train = app.add_subcommand("train", "train a classifier");
  train->add_option("--features", features, "prepared feature directory")->required();
  train->add_option("--out-ckpt", out_ckpt, "checkpoint to write")->required();
  train->add_option("--resume", resume, "continue from this checkpoint");
  train->add_option("--epochs", epochs, "epoch count override");
  train->add_option("--max-steps", max_steps, "stop after this many total steps");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--features", features, "prepared feature directory")->required();
  eval->add_option("--ckpt", ckpt, "checkpoint")->required();
  eval->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--json", json_out, "also write the JSON report here");

  auto* pred = app.add_subcommand("predict", "classify one WAV file");
  pred->add_option("--wav", wav, "16 kHz mono 16-bit WAV")->required();
  pred->add_option("--ckpt", ckpt, "checkpoint")->required();

  int seeds = 20;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference checks of every layer");
  grad->add_option("--seeds", seeds, "number of consecutive seeds from --seed (default 20)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*synth) return cmd_synth(g, n, out, preset, clip_seconds);
    if (*prepare) return cmd_prepare(g, data, out, augment, shards, train_shards);
    if (*train) return cmd_train(g, features, out_ckpt, resume, epochs, max_steps);
    if (*eval) return cmd_eval(g, features, ckpt, split, json_out);
    if (*pred) return cmd_predict(g, wav, ckpt);
    if (*grad) return cmd_gradcheck(g, seeds);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
