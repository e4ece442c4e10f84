// eslu/manifest.cpp

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

#include "eslu/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu {

namespace fs = std::filesystem;

namespace {

bool is_token(const std::string& s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void check_same_keys(const std::map<std::string, std::string>& a, const std::string& a_name,
                     const std::map<std::string, std::string>& b, const std::string& b_name) {
  for (const auto& [id, _] : a) {
    if (!b.count(id)) {
      throw ValidationError("utterance " + id + " is in " + a_name + " but missing from " +
                            b_name);
    }
  }
}

}  // namespace

void Manifest::normalize() {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.utt_id < b.utt_id; });
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!is_token(r.utt_id)) throw ValidationError("invalid utterance id '" + r.utt_id + "'");
    if (!is_token(r.speaker_id)) {
      throw ValidationError("invalid speaker id for " + r.utt_id);
    }
    if (!is_token(r.wav_path)) throw ValidationError("invalid wav path for " + r.utt_id);
    if (r.label != 0 && r.label != 1) {
      throw ValidationError("label of " + r.utt_id + " must be 0 or 1");
    }
    if (i > 0 && records[i - 1].utt_id == r.utt_id) {
      throw ValidationError("duplicate utterance id " + r.utt_id);
    }
  }
}

const UtteranceRecord* Manifest::find(const std::string& utt_id) const {
  auto it = std::lower_bound(records.begin(), records.end(), utt_id,
                             [](const auto& r, const std::string& id) { return r.utt_id < id; });
  return it != records.end() && it->utt_id == utt_id ? &*it : nullptr;
}

Spk2Utt derive_spk2utt(const Utt2Spk& utt2spk) {
  Spk2Utt out;
  for (const auto& [utt, spk] : utt2spk) out[spk].push_back(utt);
  return out;  // utt2spk iterates in sorted order, so each list is sorted
}

Utt2Spk invert_spk2utt(const Spk2Utt& spk2utt) {
  Utt2Spk out;
  for (const auto& [spk, utts] : spk2utt) {
    for (const auto& u : utts) {
      if (!out.emplace(u, spk).second) {
        throw ValidationError("utterance " + u + " listed under more than one speaker");
      }
    }
  }
  return out;
}

std::map<std::string, std::string> read_kaldi_table(const fs::path& path) {
  auto in = open_or_throw(path);
  std::map<std::string, std::string> table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 2) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected \"<id> <value>\"");
    }
    if (!table.emplace(fields[0], fields[1]).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate id " + fields[0]);
    }
  }
  return table;
}

Manifest parse_manifest_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  const auto wav = read_kaldi_table(dir / "wav.scp");
  const auto utt2spk = read_kaldi_table(dir / "utt2spk");
  const auto labels = read_kaldi_table(dir / "labels");

  check_same_keys(wav, "wav.scp", utt2spk, "utt2spk");
  check_same_keys(wav, "wav.scp", labels, "labels");
  check_same_keys(utt2spk, "utt2spk", wav, "wav.scp");
  check_same_keys(labels, "labels", wav, "wav.scp");

  if (fs::exists(dir / "spk2utt")) {
    auto in = open_or_throw(dir / "spk2utt");
    Spk2Utt given;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_ws(line);
      if (fields.size() < 2) {
        throw ValidationError("spk2utt:" + std::to_string(line_no) +
                              ": expected \"<spk> <utt>...\"");
      }
      std::vector<std::string> utts(fields.begin() + 1, fields.end());
      std::sort(utts.begin(), utts.end());
      if (!given.emplace(fields[0], std::move(utts)).second) {
        throw ValidationError("spk2utt: duplicate speaker " + fields[0]);
      }
    }
    if (invert_spk2utt(given) != Utt2Spk(utt2spk.begin(), utt2spk.end())) {
      throw ValidationError("spk2utt is inconsistent with utt2spk");
    }
  }

  Manifest m;
  m.records.reserve(wav.size());
  for (const auto& [id, path] : wav) {
    const std::string& label = labels.at(id);
    if (label != "0" && label != "1") {
      throw ValidationError("labels: utterance " + id + " has label '" + label +
                            "', expected 0 or 1");
    }
    m.records.push_back({id, path, utt2spk.at(id), label == "1" ? 1 : 0});
  }
  m.normalize();
  return m;
}

void write_manifest_dir(const Manifest& m, const fs::path& dir) {
  Manifest sorted = m;
  sorted.normalize();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> wav, u2s, lab;
  Utt2Spk utt2spk;
  for (const auto& r : sorted.records) {
    wav.push_back(r.utt_id + " " + r.wav_path);
    u2s.push_back(r.utt_id + " " + r.speaker_id);
    lab.push_back(r.utt_id + " " + std::to_string(r.label));
    utt2spk[r.utt_id] = r.speaker_id;
  }
  std::vector<std::string> s2u;
  for (const auto& [spk, utts] : derive_spk2utt(utt2spk)) {
    std::string line = spk;
    for (const auto& u : utts) line += " " + u;
    s2u.push_back(std::move(line));
  }
  write_lines(dir / "wav.scp", wav);
  write_lines(dir / "utt2spk", u2s);
  write_lines(dir / "spk2utt", s2u);
  write_lines(dir / "labels", lab);
}

void ShardPlan::validate() const {
  if (shards_per_class <= 0 || train_shards <= 0 || test_shards <= 0) {
    throw ConfigError("shard counts must be positive");
  }
  if (train_shards + test_shards != shards_per_class) {
    throw ConfigError("train_shards + test_shards must equal shards_per_class");
  }
}

ShardAssignment shard_dataset(const Manifest& m, const ShardPlan& plan) {
  plan.validate();
  std::vector<std::string> by_class[2];
  for (const auto& r : m.records) by_class[r.label].push_back(r.utt_id);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw ValidationError("class " + std::to_string(c) + " has no utterances");
    }
    if (static_cast<int>(by_class[c].size()) < plan.shards_per_class) {
      throw ValidationError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " utterances, fewer than " +
                            std::to_string(plan.shards_per_class) + " shards");
    }
    std::sort(by_class[c].begin(), by_class[c].end());
  }

  ShardAssignment out;
  auto deal = [&](std::vector<std::string> utts, int label, int first_shard, int n_shards,
                  bool train) {
    Rng rng(derive_seed(plan.seed, train ? "shard-train" : "shard-test",
                        static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::string>(utts));
    for (std::size_t i = 0; i < utts.size(); ++i) {
      const int shard = first_shard + static_cast<int>(i % static_cast<std::size_t>(n_shards));
      out.slots[utts[i]] = {label, shard, train};
    }
  };

  if (!plan.speaker_disjoint) {
    for (int c = 0; c < 2; ++c) {
      std::vector<std::string> utts = by_class[c];
      Rng rng(derive_seed(plan.seed, "shard", static_cast<std::uint64_t>(c)));
      rng.shuffle(std::span<std::string>(utts));
      for (std::size_t i = 0; i < utts.size(); ++i) {
        const int shard = static_cast<int>(i % static_cast<std::size_t>(plan.shards_per_class));
        out.slots[utts[i]] = {c, shard, shard < plan.train_shards};
      }
    }
  } else {
    // Pick test speakers until the test split holds its share of utterances.
    std::map<std::string, std::vector<const UtteranceRecord*>> by_speaker;
    for (const auto& r : m.records) by_speaker[r.speaker_id].push_back(&r);
    std::vector<std::string> speakers;
    for (const auto& [spk, _] : by_speaker) speakers.push_back(spk);
    Rng rng(derive_seed(plan.seed, "shard-speakers"));
    rng.shuffle(std::span<std::string>(speakers));
    const double target = static_cast<double>(m.records.size()) * plan.test_shards /
                          plan.shards_per_class;
    std::set<std::string> test_speakers;
    std::size_t in_test = 0;
    for (const auto& spk : speakers) {
      if (static_cast<double>(in_test) >= target) break;
      test_speakers.insert(spk);
      in_test += by_speaker[spk].size();
    }
    for (int c = 0; c < 2; ++c) {
      std::vector<std::string> train, test;
      for (const auto& id : by_class[c]) {
        (test_speakers.count(m.find(id)->speaker_id) ? test : train).push_back(id);
      }
      if (train.empty() || test.empty()) {
        throw ValidationError("speaker-disjoint split leaves class " + std::to_string(c) +
                              " without train or test utterances");
      }
      deal(std::move(train), c, 0, plan.train_shards, true);
      deal(std::move(test), c, plan.train_shards, plan.test_shards, false);
    }
  }

  for (const auto& [id, slot] : out.slots) (slot.train ? out.train : out.test).push_back(id);
  return out;
}

}  // namespace eslu
