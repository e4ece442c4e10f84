// eslu/manifest.hpp

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

// Kaldi-style data directories: wav.scp, utt2spk, spk2utt and a labels file
// (utt_id -> 0 normal / 1 abnormal) standing in for the transcript file.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace eslu {

struct UtteranceRecord {
  std::string utt_id;
  std::string wav_path;
  std::string speaker_id;
  int label = 0;

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

/// Records sorted by utt_id (byte order), ids unique.
struct Manifest {
  std::vector<UtteranceRecord> records;

  /// Sorts, then checks id uniqueness, token syntax and labels.
  void normalize();
  const UtteranceRecord* find(const std::string& utt_id) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

using Spk2Utt = std::map<std::string, std::vector<std::string>>;
using Utt2Spk = std::map<std::string, std::string>;

/// spk -> sorted utterance list.
Spk2Utt derive_spk2utt(const Utt2Spk& utt2spk);
Utt2Spk invert_spk2utt(const Spk2Utt& spk2utt);

/// Reads a two-column Kaldi table ("<id> <value>" per line). Throws
/// ValidationError naming the file and line for malformed input or a
/// repeated id.
std::map<std::string, std::string> read_kaldi_table(const std::filesystem::path& path);

Manifest parse_manifest_dir(const std::filesystem::path& dir);
void write_manifest_dir(const Manifest& m, const std::filesystem::path& dir);

struct ShardPlan {
  int shards_per_class = 32;
  int train_shards = 30;
  int test_shards = 2;
  std::uint64_t seed = 0;
  // Keeps each speaker entirely in train or entirely in test.
  bool speaker_disjoint = false;

  void validate() const;
};

struct ShardSlot {
  int label = 0;
  int shard = 0;
  bool train = true;
};

struct ShardAssignment {
  std::map<std::string, ShardSlot> slots;
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted
};

/// Per class: shuffle by seed, deal round-robin into shards; the first
/// train_shards shards form the training split.
ShardAssignment shard_dataset(const Manifest& m, const ShardPlan& plan);

}  // namespace eslu
