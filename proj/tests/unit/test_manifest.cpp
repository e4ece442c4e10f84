// eslu/tests/unit/test_manifest.cpp

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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "eslu/error.hpp"
#include "eslu/manifest.hpp"
#include "eslu/rng.hpp"
#include "scratch.hpp"

namespace eslu {
namespace {

namespace fs = std::filesystem;

void put(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

Manifest random_manifest(int n, std::uint64_t seed) {
  Rng rng(seed);
  Manifest m;
  for (int i = 0; i < n; ++i) {
    UtteranceRecord r;
    r.utt_id = "utt" + std::to_string(rng.next_u64() % 1000000) + "_" + std::to_string(i);
    r.speaker_id = "spk" + std::to_string(rng.below(7));
    r.wav_path = "/data/" + r.utt_id + ".wav";
    r.label = static_cast<int>(rng.below(2));
    m.records.push_back(r);
  }
  m.normalize();
  return m;
}

Manifest balanced(int per_class, std::uint64_t seed = 0) {
  Manifest m;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const std::string id = (c ? "pos" : "neg") + std::to_string(1000 + i);
      m.records.push_back({id, "/w/" + id + ".wav", "s" + std::to_string(i % 5), c});
    }
  }
  (void)seed;
  m.normalize();
  return m;
}

TEST(ParseManifest, TwoRecordsSorted) {
  testing::ScratchDir dir("manifest");
  put(dir / "wav.scp", "u2 /b.wav\nu1 /a.wav\n");
  put(dir / "utt2spk", "u1 s1\nu2 s2\n");
  put(dir / "labels", "u2 1\nu1 0\n");
  const Manifest m = parse_manifest_dir(dir.path());
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0], (UtteranceRecord{"u1", "/a.wav", "s1", 0}));
  EXPECT_EQ(m.records[1], (UtteranceRecord{"u2", "/b.wav", "s2", 1}));
  EXPECT_EQ(m.find("u2")->label, 1);
  EXPECT_EQ(m.find("u9"), nullptr);
}

TEST(ParseManifest, DanglingReferenceNamesUtterance) {
  testing::ScratchDir dir("manifest");
  put(dir / "wav.scp", "u1 /a.wav\nu2 /b.wav\n");
  put(dir / "utt2spk", "u1 s1\nu2 s2\nu3 s3\n");
  put(dir / "labels", "u1 0\nu2 1\n");
  try {
    parse_manifest_dir(dir.path());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("u3"), std::string::npos) << e.what();
  }
}

TEST(ParseManifest, MalformedInput) {
  testing::ScratchDir dir("manifest");
  put(dir / "utt2spk", "u1 s1\n");
  put(dir / "labels", "u1 0\n");
  put(dir / "wav.scp", "u1\n");
  EXPECT_THROW(parse_manifest_dir(dir.path()), ValidationError);
  put(dir / "wav.scp", "u1 /a.wav\nu1 /a.wav\n");
  EXPECT_THROW(parse_manifest_dir(dir.path()), ValidationError);
  put(dir / "wav.scp", "u1 /a.wav\n");
  put(dir / "labels", "u1 2\n");
  EXPECT_THROW(parse_manifest_dir(dir.path()), ValidationError);
  put(dir / "labels", "u1 1\n");
  put(dir / "spk2utt", "s9 u1\n");
  EXPECT_THROW(parse_manifest_dir(dir.path()), ValidationError);
  put(dir / "spk2utt", "s1 u1\n");
  EXPECT_NO_THROW(parse_manifest_dir(dir.path()));
  EXPECT_THROW(parse_manifest_dir(dir / "missing"), IoError);
}

TEST(Spk2Utt, InversionRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Manifest m = random_manifest(50, seed);
    Utt2Spk u2s;
    for (const auto& r : m.records) u2s[r.utt_id] = r.speaker_id;
    const Spk2Utt s2u = derive_spk2utt(u2s);
    for (const auto& [spk, utts] : s2u) {
      EXPECT_TRUE(std::is_sorted(utts.begin(), utts.end())) << spk;
    }
    EXPECT_EQ(invert_spk2utt(s2u), u2s);
  }
}

TEST(WriteManifest, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    testing::ScratchDir dir("manifest");
    const Manifest m = random_manifest(40, seed);
    write_manifest_dir(m, dir.path());
    EXPECT_EQ(parse_manifest_dir(dir.path()), m);
  }
}

TEST(WriteManifest, OneRecordGivesOneLinePerFile) {
  testing::ScratchDir dir("manifest");
  Manifest m;
  m.records.push_back({"u1", "/a.wav", "s1", 1});
  write_manifest_dir(m, dir.path());
  for (const char* f : {"wav.scp", "utt2spk", "spk2utt", "labels"}) {
    EXPECT_EQ(line_count(dir / f), 1) << f;
  }
  EXPECT_EQ(testing::slurp(dir / "wav.scp"), "u1 /a.wav\n");
  EXPECT_EQ(testing::slurp(dir / "labels"), "u1 1\n");
}

TEST(WriteManifest, Spk2UttLine) {
  testing::ScratchDir dir("manifest");
  Manifest m;
  m.records.push_back({"u2", "/b.wav", "s1", 0});
  m.records.push_back({"u1", "/a.wav", "s1", 1});
  m.normalize();
  write_manifest_dir(m, dir.path());
  EXPECT_EQ(testing::slurp(dir / "spk2utt"), "s1 u1 u2\n");
}

TEST(ShardDataset, DefaultPlanArithmetic) {
  const ShardAssignment a = shard_dataset(balanced(64), ShardPlan{});
  EXPECT_EQ(a.train.size(), 120u);
  EXPECT_EQ(a.test.size(), 8u);
  std::map<std::pair<int, int>, int> per_shard;
  int train_pos = 0, test_pos = 0;
  for (const auto& [id, slot] : a.slots) {
    ++per_shard[{slot.label, slot.shard}];
    EXPECT_EQ(slot.train, slot.shard < 30);
    if (slot.label == 1) (slot.train ? train_pos : test_pos)++;
  }
  EXPECT_EQ(per_shard.size(), 64u);
  for (const auto& [k, n] : per_shard) EXPECT_EQ(n, 2);
  EXPECT_EQ(train_pos, 60);
  EXPECT_EQ(test_pos, 4);
}

TEST(ShardDataset, Deterministic) {
  const Manifest m = random_manifest(300, 4);
  ShardPlan plan;
  plan.seed = 17;
  const ShardAssignment a = shard_dataset(m, plan), b = shard_dataset(m, plan);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  plan.seed = 18;
  EXPECT_NE(shard_dataset(m, plan).train, a.train);
}

TEST(ShardDataset, IsAPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Manifest m = random_manifest(200 + static_cast<int>(seed) * 7, seed);
    ShardPlan plan;
    plan.seed = seed;
    const ShardAssignment a = shard_dataset(m, plan);
    std::set<std::string> train(a.train.begin(), a.train.end()), test(a.test.begin(), a.test.end());
    EXPECT_EQ(train.size(), a.train.size());
    std::set<std::string> all;
    for (const auto& r : m.records) all.insert(r.utt_id);
    std::set<std::string> both;
    for (const auto& id : test) {
      EXPECT_EQ(train.count(id), 0u) << id;
      both.insert(id);
    }
    both.insert(train.begin(), train.end());
    EXPECT_EQ(both, all);
    std::set<int> test_labels;
    for (const auto& id : test) test_labels.insert(m.find(id)->label);
    EXPECT_EQ(test_labels.size(), 2u);
    std::map<std::pair<int, int>, int> sizes;
    for (const auto& [id, slot] : a.slots) ++sizes[{slot.label, slot.shard}];
    for (int c = 0; c < 2; ++c) {
      int lo = 1 << 30, hi = 0;
      for (int s = 0; s < 32; ++s) {
        lo = std::min(lo, sizes[{c, s}]);
        hi = std::max(hi, sizes[{c, s}]);
      }
      EXPECT_LE(hi - lo, 1);
    }
  }
}

TEST(ShardDataset, ClassTooSmall) {
  EXPECT_THROW(shard_dataset(balanced(31), ShardPlan{}), ValidationError);
  ShardPlan bad;
  bad.test_shards = 3;
  EXPECT_THROW(shard_dataset(balanced(64), bad), ConfigError);
}

TEST(ShardDataset, SpeakerDisjoint) {
  ShardPlan plan;
  plan.shards_per_class = 4;
  plan.train_shards = 3;
  plan.test_shards = 1;
  plan.speaker_disjoint = true;
  const Manifest m = random_manifest(300, 2);
  const ShardAssignment a = shard_dataset(m, plan);
  std::set<std::string> train_spk, test_spk;
  for (const auto& id : a.train) train_spk.insert(m.find(id)->speaker_id);
  for (const auto& id : a.test) test_spk.insert(m.find(id)->speaker_id);
  for (const auto& s : test_spk) EXPECT_EQ(train_spk.count(s), 0u) << s;
  EXPECT_EQ(a.train.size() + a.test.size(), m.records.size());
}

}  // namespace
}  // namespace eslu
