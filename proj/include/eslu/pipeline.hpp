// eslu/pipeline.hpp

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

// Feature preparation and split loading shared by the command line tool
// and the experiment harness.
//
// Layout written by prepare_features():
//   out/ark/{neg,pos}_NN.fark + .scp   one archive per (class, shard)
//   out/train.scp, out/test.scp        concatenated indexes
//   out/labels, out/utt2spk            copied from the manifest
//   out/events.gt                      copied when the data dir has one
//   out/prepare.json                   options used

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eslu/config.hpp"
#include "eslu/model.hpp"

namespace eslu {

enum class AugmentMode { kNone, kNoise, kReverb, kBoth };

std::string to_string(AugmentMode m);
AugmentMode augment_mode_from_string(const std::string& s);

struct PrepareOptions {
  FbankConfig fbank;
  ShardPlan plan;
  AugmentMode augment_mode = AugmentMode::kNone;
  AugmentConfig augment;
  std::uint64_t seed = 0;
};

struct PrepareSummary {
  int archives = 0;
  std::size_t train_utts = 0;
  std::size_t test_utts = 0;
};

/// Augmentation, when enabled, is applied to training utterances only and
/// is seeded per utterance.
PrepareSummary prepare_features(const std::filesystem::path& data_dir,
                                const std::filesystem::path& out_dir, const PrepareOptions& opt);

/// Loads "<features_dir>/<split>.scp" with labels. Throws ValidationError
/// for an utterance without a label.
std::vector<TrainingExample> load_split(const std::filesystem::path& features_dir,
                                        const std::string& split);

/// Per-utterance ground truth from events.gt: onset seconds, or none.
std::map<std::string, std::optional<double>> read_event_onsets(const std::filesystem::path& path);

}  // namespace eslu
