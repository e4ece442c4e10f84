// eslu/config.hpp

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

// JSON experiment configuration. Unknown keys are rejected everywhere.
//
// {
//   "encoders": [{"id": "A", "kind": "frozen_projection", "output_dim": 1024,
//                 "frame_stride": 1, "init_seed": 1, "band": [0, 0]}, ...],
//   "lstm_layers": 2, "hidden": 256, "num_classes": 2, "head": "maxpool",
//   "attention_dim": 0, "mean_normalize": false,
//   "fbank": {"frame_len_ms": 25, "frame_shift_ms": 10, "num_mels": 80, ...},
//   "optimizer": "adam", "lr": 0.001, "momentum": 0, "epochs": 10, "seed": 0,
//   "shuffle": true, "gradient_clip_norm": 5.0, "max_steps": 0,
//   "synth": {...}, "shards": {...}, "augment": {...}
// }

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "eslu/manifest.hpp"
#include "eslu/model.hpp"
#include "eslu/synth.hpp"

namespace eslu {

struct AugmentConfig {
  Range noise_snr_db{5.0, 20.0};
  Range rt60_s{0.2, 0.6};
  std::string noise_wav;  // empty: seeded synthetic noise
  std::string rir_wav;    // empty: synthetic_rir()
};

struct ExperimentConfig {
  SluConfig model = SluConfig::reference();
  TrainConfig train;
  SynthSpec synth;
  ShardPlan shards;
  AugmentConfig augment;
};

nlohmann::json to_json(const FbankConfig& c);
nlohmann::json to_json(const EncoderSpec& s);
nlohmann::json to_json(const SluConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthSpec& s);
nlohmann::json to_json(const ShardPlan& p);
nlohmann::json to_json(const AugmentConfig& a);
nlohmann::json to_json(const ExperimentConfig& e);

// All parsers start from the defaults, overwrite the keys present, and
// throw ConfigError on unknown keys, wrong types or invalid values.
FbankConfig fbank_config_from_json(const nlohmann::json& j);
EncoderSpec encoder_spec_from_json(const nlohmann::json& j);
SluConfig slu_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SynthSpec synth_spec_from_json(const nlohmann::json& j, SynthSpec base = {});
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace eslu
