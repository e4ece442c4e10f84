// eslu/model.cpp

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

#include "eslu/model.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "eslu/config.hpp"
#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu {

namespace {

const char kMetaConfig[] = "meta.config";
const char kMetaStep[] = "meta.step";

Eigen::Index argmax(const RowVector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

Eigen::Index ensemble_dim(const SluConfig& cfg) {
  Eigen::Index d = 0;
  for (const auto& e : cfg.encoders) d += e.output_dim;
  return d;
}

}  // namespace

std::string to_string(PoolingHead head) {
  return head == PoolingHead::kMaxPool ? "maxpool" : "attention";
}

PoolingHead pooling_head_from_string(const std::string& s) {
  if (s == "maxpool") return PoolingHead::kMaxPool;
  if (s == "attention") return PoolingHead::kAttention;
  throw ConfigError("unknown head '" + s + "' (expected maxpool or attention)");
}

SluConfig SluConfig::reference() {
  SluConfig c;
  EncoderSpec a;
  a.id = "A";
  a.output_dim = 1024;
  a.init_seed = 1;
  EncoderSpec b;
  b.id = "B";
  b.output_dim = 256;
  b.init_seed = 2;
  c.encoders = {a, b};
  return c;
}

void SluConfig::validate() const {
  if (encoders.empty()) throw ConfigError("model: at least one encoder is required");
  std::set<std::string> ids;
  for (const auto& e : encoders) {
    e.validate();
    if (!ids.insert(e.id).second) throw ConfigError("model: duplicate encoder id " + e.id);
  }
  if (lstm_layers < 1) throw ConfigError("model: lstm_layers must be >= 1");
  if (hidden < 1) throw ConfigError("model: hidden must be >= 1");
  if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
  if (attention_dim < 0) throw ConfigError("model: attention_dim must be >= 0");
  fbank.validate();
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be positive");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
  if (!(gradient_clip_norm >= 0.0)) throw ConfigError("train: gradient_clip_norm must be >= 0");
}

nn::OptimizerConfig TrainConfig::optimizer_config() const {
  nn::OptimizerConfig o;
  o.kind = optimizer;
  o.lr = lr;
  o.momentum = momentum;
  return o;
}

// ---------------------------------------------------------------- SluModel

SluModel::SluModel(SluConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& spec : cfg_.encoders) encoders_.push_back(make_encoder(spec, cfg_.fbank.num_mels));
  lstm_ = nn::BiLstm("lstm", ensemble_dim(cfg_), cfg_.hidden, cfg_.lstm_layers, init_seed);
  output_ = nn::Linear("output", 2 * cfg_.hidden, cfg_.num_classes, init_seed);
  if (cfg_.head == PoolingHead::kAttention) {
    const int attn = cfg_.attention_dim > 0 ? cfg_.attention_dim : cfg_.hidden;
    attention_.emplace("attention", 2 * cfg_.hidden, attn, init_seed);
  }
}

FeatureMatrix SluModel::features(const Waveform& w) const {
  FeatureMatrix f = fbank(w, cfg_.fbank);
  return cfg_.mean_normalize ? mean_normalize(f) : f;
}

EncoderOutput SluModel::encode(const FeatureMatrix& fbank_features,
                               const std::string& utt_id) const {
  const FeatureMatrix f = cfg_.mean_normalize ? mean_normalize(fbank_features) : fbank_features;
  std::vector<EncoderOutput> outs;
  outs.reserve(encoders_.size());
  for (const auto& e : encoders_) outs.push_back(e->encode(f, utt_id));
  return align_and_concat(outs);
}

ForwardPass SluModel::forward_encoded(const EncoderOutput& encoded) const {
  if (encoded.data.cols() != ensemble_dim(cfg_)) {
    throw ValidationError("model: encoded width " + std::to_string(encoded.data.cols()) +
                          " does not match " + std::to_string(ensemble_dim(cfg_)));
  }
  ForwardPass fwd;
  fwd.input = encoded.data;
  fwd.stride = encoded.stride;
  fwd.lstm_out = lstm_.forward(fwd.input, &fwd.lstm_cache);
  if (attention_) {
    fwd.attention = nn::attention_pool(fwd.lstm_out, *attention_);
    fwd.scores = output_.forward(Matrix(fwd.attention.context)).row(0);
  } else {
    fwd.frame_logits = output_.forward(fwd.lstm_out);
    fwd.pooled = nn::max_pool_time(fwd.frame_logits);
    fwd.scores = fwd.pooled.scores;
  }
  return fwd;
}

ForwardPass SluModel::forward_features(const FeatureMatrix& fbank_features,
                                       const std::string& utt_id) const {
  return forward_encoded(encode(fbank_features, utt_id));
}

RowVector SluModel::forward(const Waveform& w, const std::string& utt_id) const {
  return forward_features(fbank(w, cfg_.fbank), utt_id).scores;
}

void SluModel::backward(ForwardPass& fwd, const RowVector& dscores) {
  Matrix dlstm;
  if (attention_) {
    const Matrix context(fwd.attention.context);
    const Matrix dcontext = output_.backward(context, Matrix(dscores));
    dlstm = nn::attention_pool_backward(fwd.lstm_out, *attention_, fwd.attention, dcontext.row(0));
  } else {
    const Matrix dlogits = nn::max_pool_time_backward(fwd.pooled, dscores, fwd.frame_logits.rows());
    dlstm = output_.backward(fwd.lstm_out, dlogits);
  }
  lstm_.backward(fwd.lstm_cache, dlstm);
}

nn::ParameterSet SluModel::trainable_parameters() {
  nn::ParameterSet set;
  lstm_.collect(set);
  output_.collect(set);
  if (attention_) attention_->collect(set);
  return set;
}

nn::ParameterSet SluModel::all_parameters() {
  nn::ParameterSet set;
  for (auto& e : encoders_) e->collect(set);
  set.add_all(trainable_parameters());
  return set;
}

std::vector<NamedTensor> SluModel::checkpoint_tensors() {
  nlohmann::json meta = {{"model", to_json(cfg_)}};
  if (train_config) meta["train"] = to_json(*train_config);
  const std::string text = meta.dump();
  NamedTensor cfg_tensor{kMetaConfig, {static_cast<std::uint32_t>(text.size())}, {}};
  for (unsigned char ch : text) cfg_tensor.data.push_back(static_cast<float>(ch));
  NamedTensor step_tensor{kMetaStep, {}, {static_cast<float>(step_)}};
  if (static_cast<std::uint64_t>(step_tensor.data[0]) != step_) {
    throw ValidationError("checkpoint: step counter exceeds the f32 integer range");
  }

  std::vector<NamedTensor> out = {cfg_tensor, step_tensor};
  for (auto& t : nn::to_tensors(all_parameters(), true)) out.push_back(std::move(t));
  return out;
}

void SluModel::save(const std::filesystem::path& path) {
  const auto tensors = checkpoint_tensors();
  write_tensor_file(path, tensors);
}

std::string SluModel::checkpoint_bytes() {
  const auto tensors = checkpoint_tensors();
  return encode_tensor_file(tensors);
}

std::unique_ptr<SluModel> SluModel::load(const std::filesystem::path& path) {
  const std::vector<NamedTensor> tensors = read_tensor_file(path);
  const NamedTensor* cfg_tensor = nullptr;
  const NamedTensor* step_tensor = nullptr;
  for (const auto& t : tensors) {
    if (t.name == kMetaConfig) cfg_tensor = &t;
    if (t.name == kMetaStep) step_tensor = &t;
  }
  if (!cfg_tensor || !step_tensor || step_tensor->data.size() != 1) {
    throw ValidationError(path.string() + ": not a model checkpoint (missing meta records)");
  }
  std::string text;
  for (float v : cfg_tensor->data) {
    if (!(v >= 0.0f && v < 256.0f)) throw ValidationError(path.string() + ": corrupt meta.config");
    text.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(path.string() + ": corrupt meta.config");
  }
  if (!meta.contains("model")) throw ValidationError(path.string() + ": meta.config lacks model");

  auto model = std::make_unique<SluModel>(slu_config_from_json(meta["model"]), 0);
  if (meta.contains("train")) model->train_config = train_config_from_json(meta["train"]);
  nn::load_tensors(model->all_parameters(), tensors);
  model->step_ = static_cast<std::uint64_t>(step_tensor->data[0]);
  return model;
}

// ---------------------------------------------------------------- training

double example_loss(SluModel& model, const EncoderOutput& encoded, int label, bool with_grad) {
  ForwardPass fwd = model.forward_encoded(encoded);
  const nn::LossResult loss = nn::softmax_cross_entropy(fwd.scores, label);
  if (with_grad) model.backward(fwd, loss.grad);
  return loss.loss;
}

Trainer::Trainer(SluModel& model, TrainConfig cfg)
    : model_(model), cfg_(cfg), optimizer_(cfg.optimizer_config()) {
  cfg_.validate();
}

std::vector<EpochStats> Trainer::run(const std::vector<TrainingExample>& data,
                                     const std::function<void(const EpochStats&)>& on_epoch) {
  if (data.empty()) throw ValidationError("train: empty training set");
  bool seen[2] = {false, false};
  for (const auto& ex : data) {
    if (ex.label < 0 || ex.label >= model_.config().num_classes) {
      throw ValidationError("train: label out of range for " + ex.utt_id);
    }
    if (ex.label < 2) seen[ex.label] = true;
  }
  if (!seen[0] || !seen[1]) throw ValidationError("train: both classes must be present");

  // The encoders are frozen, so their outputs are computed once.
  std::vector<EncoderOutput> encoded;
  encoded.reserve(data.size());
  for (const auto& ex : data) encoded.push_back(model_.encode(ex.features, ex.utt_id));

  const std::uint64_t n = data.size();
  const nn::ParameterSet params = model_.trainable_parameters();
  params.zero_grad();
  optimizer_.set_steps(model_.step());

  std::vector<EpochStats> history;
  auto budget_left = [&] { return cfg_.max_steps == 0 || model_.step() < cfg_.max_steps; };
  for (std::uint64_t epoch = model_.step() / n;
       epoch < static_cast<std::uint64_t>(cfg_.epochs) && budget_left(); ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg_.shuffle) {
      Rng rng(derive_seed(cfg_.seed, "epoch", epoch));
      rng.shuffle(std::span<std::size_t>(order));
    }

    EpochStats stats;
    stats.epoch = static_cast<int>(epoch);
    ConfusionCounts counts;
    double loss_sum = 0.0;
    for (std::uint64_t k = model_.step() % n; k < n && budget_left(); ++k) {
      const std::size_t i = order[k];
      ForwardPass fwd = model_.forward_encoded(encoded[i]);
      const nn::LossResult loss = nn::softmax_cross_entropy(fwd.scores, data[i].label);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("train: non-finite loss at step " + std::to_string(model_.step() + 1) +
                           " (" + data[i].utt_id + ")");
      }
      model_.backward(fwd, loss.grad);
      if (cfg_.gradient_clip_norm > 0.0) {
        const double norm = params.grad_norm();
        if (norm > cfg_.gradient_clip_norm) params.scale_grads(cfg_.gradient_clip_norm / norm);
      }
      optimizer_.step(params);
      model_.set_step(model_.step() + 1);

      loss_sum += loss.loss;
      counts = accumulate(counts, argmax(fwd.scores) == 1 ? 1 : 0, data[i].label == 1 ? 1 : 0);
      ++stats.steps;
    }
    if (stats.steps == 0) break;
    stats.mean_loss = loss_sum / static_cast<double>(stats.steps);
    stats.train_f1 = f1(counts);
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

// ---------------------------------------------------------------- inference

Prediction predict_encoded(const SluModel& model, const EncoderOutput& encoded,
                           double frame_shift_ms) {
  const ForwardPass fwd = model.forward_encoded(encoded);
  Prediction p;
  p.scores = fwd.scores;
  p.label = static_cast<int>(argmax(fwd.scores));
  if (model.config().head == PoolingHead::kMaxPool) {
    p.event_row = fwd.pooled.argmax[static_cast<std::size_t>(p.label)];
    p.event_time_s = static_cast<double>(p.event_row) * encoded.stride * frame_shift_ms / 1000.0;
  }
  return p;
}

Prediction predict(const SluModel& model, const Waveform& w, const std::string& utt_id) {
  const FeatureMatrix f = fbank(w, model.config().fbank);
  return predict_encoded(model, model.encode(f, utt_id), model.config().fbank.frame_shift_ms);
}

EvaluationResult evaluate(const SluModel& model, const std::vector<TrainingExample>& data) {
  if (data.empty()) throw ValidationError("eval: empty test set");
  EvaluationResult r;
  for (const auto& ex : data) {
    const Prediction p = predict_encoded(model, model.encode(ex.features, ex.utt_id),
                                         model.config().fbank.frame_shift_ms);
    r.predictions.push_back(p.label);
    r.counts = accumulate(r.counts, p.label == 1 ? 1 : 0, ex.label == 1 ? 1 : 0);
  }
  r.report = report(r.counts);
  return r;
}

}  // namespace eslu
