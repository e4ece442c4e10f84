// eslu/model.hpp

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

// The ensemble classifier: filterbank -> frozen encoders -> aligned
// concatenation -> stacked biLSTM -> per-step linear -> pooling head.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eslu/encoders.hpp"
#include "eslu/features.hpp"
#include "eslu/metrics.hpp"
#include "eslu/nn.hpp"

namespace eslu {

enum class PoolingHead { kMaxPool, kAttention };

std::string to_string(PoolingHead head);
PoolingHead pooling_head_from_string(const std::string& s);

struct SluConfig {
  std::vector<EncoderSpec> encoders;
  int lstm_layers = 2;
  int hidden = 256;
  int num_classes = 2;
  PoolingHead head = PoolingHead::kMaxPool;
  int attention_dim = 0;  // 0: same as hidden
  FbankConfig fbank;
  bool mean_normalize = false;

  /// Two frozen projections with 1024- and 256-dim outputs.
  static SluConfig reference();
  void validate() const;
};

struct TrainConfig {
  nn::OptimizerConfig::Kind optimizer = nn::OptimizerConfig::Kind::kAdam;
  double lr = 1e-3;
  double momentum = 0.0;
  int epochs = 10;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double gradient_clip_norm = 5.0;
  // Stop after this many optimizer steps in total (0: run all epochs).
  std::uint64_t max_steps = 0;

  void validate() const;
  nn::OptimizerConfig optimizer_config() const;
};

/// Everything one forward pass keeps for the backward pass.
struct ForwardPass {
  Matrix input;         // aligned ensemble features, T' x sum(dims)
  int stride = 1;       // input frames per row of `input`
  nn::BiLstm::Cache lstm_cache;
  Matrix lstm_out;      // T' x 2H
  Matrix frame_logits;  // max-pool head: T' x C
  nn::MaxPoolResult pooled;
  nn::AttentionResult attention;
  RowVector scores;     // 1 x C
};

class SluModel {
 public:
  SluModel(SluConfig cfg, std::uint64_t init_seed);
  SluModel(const SluModel&) = delete;
  SluModel& operator=(const SluModel&) = delete;

  const SluConfig& config() const { return cfg_; }

  /// fbank (plus optional mean normalization).
  FeatureMatrix features(const Waveform& w) const;

  /// Runs the encoders on raw filterbank features and aligns their outputs.
  /// Mean normalization, when configured, happens here.
  EncoderOutput encode(const FeatureMatrix& fbank_features, const std::string& utt_id) const;

  ForwardPass forward_encoded(const EncoderOutput& encoded) const;
  ForwardPass forward_features(const FeatureMatrix& fbank_features,
                               const std::string& utt_id) const;
  RowVector forward(const Waveform& w, const std::string& utt_id = "") const;

  /// Back-propagates d loss / d scores into the classifier gradients.
  void backward(ForwardPass& fwd, const RowVector& dscores);

  /// Classifier parameters (biLSTM, linear, attention).
  nn::ParameterSet trainable_parameters();
  /// Classifier plus frozen encoder weights.
  nn::ParameterSet all_parameters();

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  /// Optional training configuration carried along in checkpoints.
  std::optional<TrainConfig> train_config;

  void save(const std::filesystem::path& path);
  std::string checkpoint_bytes();
  static std::unique_ptr<SluModel> load(const std::filesystem::path& path);

  const std::vector<std::unique_ptr<Encoder>>& encoders() const { return encoders_; }

 private:
  std::vector<NamedTensor> checkpoint_tensors();

  SluConfig cfg_;
  std::vector<std::unique_ptr<Encoder>> encoders_;
  nn::BiLstm lstm_;
  nn::Linear output_;
  std::optional<nn::AttentionParams> attention_;
  std::uint64_t step_ = 0;
};

struct TrainingExample {
  std::string utt_id;
  FeatureMatrix features;  // raw filterbank
  int label = 0;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_f1 = 0.0;
  std::uint64_t steps = 0;  // optimizer steps taken in this epoch
};

/// Batch-size-1 trainer: cross entropy on pooled scores, global-norm
/// gradient clipping, seeded per-epoch shuffling. Resumes from model.step().
class Trainer {
 public:
  Trainer(SluModel& model, TrainConfig cfg);

  /// Trains until cfg.epochs are complete or max_steps is reached.
  /// `on_epoch` (optional) sees each finished epoch.
  std::vector<EpochStats> run(const std::vector<TrainingExample>& data,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

  nn::Optimizer& optimizer() { return optimizer_; }

 private:
  SluModel& model_;
  TrainConfig cfg_;
  nn::Optimizer optimizer_;
};

/// Loss and gradient for one encoded example; exposed for gradient checks.
double example_loss(SluModel& model, const EncoderOutput& encoded, int label, bool with_grad);

struct Prediction {
  int label = 0;
  RowVector scores;
  std::optional<double> event_time_s;  // max-pool head only
  Eigen::Index event_row = 0;
};

Prediction predict_encoded(const SluModel& model, const EncoderOutput& encoded,
                           double frame_shift_ms);
Prediction predict(const SluModel& model, const Waveform& w, const std::string& utt_id = "");

struct EvaluationResult {
  ConfusionCounts counts;
  MetricsReport report;
  std::vector<int> predictions;
};

EvaluationResult evaluate(const SluModel& model, const std::vector<TrainingExample>& data);

}  // namespace eslu
