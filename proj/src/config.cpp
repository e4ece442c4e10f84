// eslu/config.cpp

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

#include "eslu/config.hpp"

#include <fstream>
#include <set>

#include "eslu/error.hpp"

namespace eslu {

using nlohmann::json;

namespace {

/// Reads keys out of a JSON object and remembers which ones were consumed,
/// so that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(context_ + "." + key + ": wrong type");
    }
  }

  void get_range(const std::string& key, Range& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ConfigError(context_ + "." + key + ": expected [lo, hi]");
    }
    out = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  const json* sub(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> used_;
};

void apply_slu(ObjectReader& rd, SluConfig& c) {
  if (const json* enc = rd.sub("encoders")) {
    if (!enc->is_array() || enc->empty()) {
      throw ConfigError("config.encoders: expected a nonempty array");
    }
    c.encoders.clear();
    for (const auto& e : *enc) c.encoders.push_back(encoder_spec_from_json(e));
  }
  rd.get("lstm_layers", c.lstm_layers);
  rd.get("hidden", c.hidden);
  rd.get("num_classes", c.num_classes);
  std::string head = to_string(c.head);
  rd.get("head", head);
  c.head = pooling_head_from_string(head);
  rd.get("attention_dim", c.attention_dim);
  rd.get("mean_normalize", c.mean_normalize);
  if (const json* fb = rd.sub("fbank")) c.fbank = fbank_config_from_json(*fb);
}

void apply_train(ObjectReader& rd, TrainConfig& c) {
  std::string opt = c.optimizer == nn::OptimizerConfig::Kind::kAdam ? "adam" : "sgd";
  rd.get("optimizer", opt);
  if (opt == "adam") {
    c.optimizer = nn::OptimizerConfig::Kind::kAdam;
  } else if (opt == "sgd") {
    c.optimizer = nn::OptimizerConfig::Kind::kSgd;
  } else {
    throw ConfigError("config.optimizer: expected adam or sgd");
  }
  rd.get("lr", c.lr);
  rd.get("momentum", c.momentum);
  rd.get("epochs", c.epochs);
  rd.get("seed", c.seed);
  rd.get("shuffle", c.shuffle);
  rd.get("gradient_clip_norm", c.gradient_clip_norm);
  rd.get("max_steps", c.max_steps);
}

ShardPlan shard_plan_from_json(const json& j) {
  ShardPlan p;
  ObjectReader rd(j, "config.shards");
  rd.get("shards_per_class", p.shards_per_class);
  rd.get("train_shards", p.train_shards);
  rd.get("test_shards", p.test_shards);
  rd.get("seed", p.seed);
  rd.get("speaker_disjoint", p.speaker_disjoint);
  rd.finish();
  p.validate();
  return p;
}

AugmentConfig augment_from_json(const json& j) {
  AugmentConfig a;
  ObjectReader rd(j, "config.augment");
  rd.get_range("noise_snr_db", a.noise_snr_db);
  rd.get_range("rt60_s", a.rt60_s);
  rd.get("noise_wav", a.noise_wav);
  rd.get("rir_wav", a.rir_wav);
  rd.finish();
  if (a.noise_snr_db.lo > a.noise_snr_db.hi || !(a.rt60_s.lo > 0.0) || a.rt60_s.lo > a.rt60_s.hi) {
    throw ConfigError("config.augment: invalid range");
  }
  return a;
}

json range_json(Range r) { return json::array({r.lo, r.hi}); }

}  // namespace

json to_json(const FbankConfig& c) {
  return {{"frame_len_ms", c.frame_len_ms}, {"frame_shift_ms", c.frame_shift_ms},
          {"num_mels", c.num_mels},         {"fft_size", c.fft_size},
          {"preemphasis", c.preemphasis},   {"window", "hamming"},
          {"log_floor", c.log_floor},       {"mel_low_hz", c.mel_low_hz},
          {"mel_high_hz", c.mel_high_hz}};
}

json to_json(const EncoderSpec& s) {
  json j = {{"id", s.id},
            {"kind", to_string(s.kind)},
            {"output_dim", s.output_dim},
            {"frame_stride", s.frame_stride},
            {"init_seed", s.init_seed},
            {"band", json::array({s.band_first, s.band_count})}};
  if (!s.feature_scp.empty()) j["feature_scp"] = s.feature_scp;
  return j;
}

json to_json(const SluConfig& c) {
  json enc = json::array();
  for (const auto& e : c.encoders) enc.push_back(to_json(e));
  return {{"encoders", enc},
          {"lstm_layers", c.lstm_layers},
          {"hidden", c.hidden},
          {"num_classes", c.num_classes},
          {"head", to_string(c.head)},
          {"attention_dim", c.attention_dim},
          {"mean_normalize", c.mean_normalize},
          {"fbank", to_json(c.fbank)}};
}

json to_json(const TrainConfig& c) {
  return {{"optimizer", c.optimizer == nn::OptimizerConfig::Kind::kAdam ? "adam" : "sgd"},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"shuffle", c.shuffle},
          {"gradient_clip_norm", c.gradient_clip_norm},
          {"max_steps", c.max_steps}};
}

json to_json(const SynthSpec& s) {
  return {{"clip_seconds", s.clip_seconds},
          {"rate", s.rate},
          {"positive_fraction", s.positive_fraction},
          {"event_duration_s", range_json(s.event_duration_s)},
          {"event_kind", to_string(s.event_kind)},
          {"event_snr_db", range_json(s.event_snr_db)},
          {"distractor_count", range_json(s.distractor_count)},
          {"distractor_hz", range_json(s.distractor_hz)},
          {"background_rms", s.background_rms},
          {"background_pole", s.background_pole},
          {"num_speakers", s.num_speakers}};
}

json to_json(const ShardPlan& p) {
  return {{"shards_per_class", p.shards_per_class},
          {"train_shards", p.train_shards},
          {"test_shards", p.test_shards},
          {"seed", p.seed},
          {"speaker_disjoint", p.speaker_disjoint}};
}

json to_json(const AugmentConfig& a) {
  return {{"noise_snr_db", range_json(a.noise_snr_db)},
          {"rt60_s", range_json(a.rt60_s)},
          {"noise_wav", a.noise_wav},
          {"rir_wav", a.rir_wav}};
}

json to_json(const ExperimentConfig& e) {
  json j = to_json(e.model);
  const json train = to_json(e.train);
  for (auto& [k, v] : train.items()) j[k] = v;
  j["synth"] = to_json(e.synth);
  j["shards"] = to_json(e.shards);
  j["augment"] = to_json(e.augment);
  return j;
}

FbankConfig fbank_config_from_json(const json& j) {
  FbankConfig c;
  ObjectReader rd(j, "config.fbank");
  rd.get("frame_len_ms", c.frame_len_ms);
  rd.get("frame_shift_ms", c.frame_shift_ms);
  rd.get("num_mels", c.num_mels);
  rd.get("fft_size", c.fft_size);
  rd.get("preemphasis", c.preemphasis);
  std::string window = "hamming";
  rd.get("window", window);
  if (window != "hamming") throw ConfigError("config.fbank.window: only hamming is supported");
  rd.get("log_floor", c.log_floor);
  rd.get("mel_low_hz", c.mel_low_hz);
  rd.get("mel_high_hz", c.mel_high_hz);
  rd.finish();
  c.validate();
  return c;
}

EncoderSpec encoder_spec_from_json(const json& j) {
  EncoderSpec s;
  ObjectReader rd(j, "config.encoders[]");
  rd.get("id", s.id);
  std::string kind = to_string(s.kind);
  rd.get("kind", kind);
  s.kind = encoder_kind_from_string(kind);
  rd.get("output_dim", s.output_dim);
  rd.get("frame_stride", s.frame_stride);
  rd.get("init_seed", s.init_seed);
  rd.get("feature_scp", s.feature_scp);
  if (const json* band = rd.sub("band")) {
    if (!band->is_array() || band->size() != 2) {
      throw ConfigError("config.encoders[].band: expected [first, count]");
    }
    s.band_first = (*band)[0].get<int>();
    s.band_count = (*band)[1].get<int>();
  }
  rd.finish();
  s.validate();
  return s;
}

SluConfig slu_config_from_json(const json& j) {
  SluConfig c = SluConfig::reference();
  ObjectReader rd(j, "config");
  apply_slu(rd, c);
  rd.finish();
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  ObjectReader rd(j, "config");
  apply_train(rd, c);
  rd.finish();
  c.validate();
  return c;
}

SynthSpec synth_spec_from_json(const json& j, SynthSpec s) {
  ObjectReader rd(j, "config.synth");
  rd.get("clip_seconds", s.clip_seconds);
  rd.get("rate", s.rate);
  rd.get("positive_fraction", s.positive_fraction);
  rd.get_range("event_duration_s", s.event_duration_s);
  std::string kind = to_string(s.event_kind);
  rd.get("event_kind", kind);
  s.event_kind = event_kind_from_string(kind);
  rd.get_range("event_snr_db", s.event_snr_db);
  rd.get_range("distractor_count", s.distractor_count);
  rd.get_range("distractor_hz", s.distractor_hz);
  rd.get("background_rms", s.background_rms);
  rd.get("background_pole", s.background_pole);
  rd.get("num_speakers", s.num_speakers);
  rd.finish();
  s.validate();
  return s;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig e;
  ObjectReader rd(j, "config");
  apply_slu(rd, e.model);
  apply_train(rd, e.train);
  if (const json* s = rd.sub("synth")) e.synth = synth_spec_from_json(*s);
  if (const json* s = rd.sub("shards")) e.shards = shard_plan_from_json(*s);
  if (const json* s = rd.sub("augment")) e.augment = augment_from_json(*s);
  rd.finish();
  e.model.validate();
  e.train.validate();
  return e;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError(path.string() + ": invalid JSON: " + ex.what());
  }
  return experiment_config_from_json(j);
}

}  // namespace eslu
