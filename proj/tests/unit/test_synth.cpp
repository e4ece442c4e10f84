// eslu/tests/unit/test_synth.cpp

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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "eslu/config.hpp"
#include "eslu/error.hpp"
#include "eslu/metrics.hpp"
#include "eslu/rng.hpp"
#include "eslu/synth.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

namespace eslu {
namespace {

TEST(GenerateClip, EventPlacement) {
  const SynthSpec spec = SynthSpec::easy();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthClip pos = generate_clip(seed, 1, spec);
    ASSERT_TRUE(pos.event_onset_s.has_value());
    EXPECT_GE(*pos.event_onset_s, 0.0);
    EXPECT_GE(pos.event_duration_s, spec.event_duration_s.lo);
    EXPECT_LE(pos.event_duration_s, spec.event_duration_s.hi);
    EXPECT_LE(*pos.event_onset_s + pos.event_duration_s, spec.clip_seconds + 1e-12);
    EXPECT_EQ(pos.wave.size(), 240000u);
    EXPECT_LE(peak_abs(pos.wave.samples), 1.0);
    const SynthClip neg = generate_clip(seed, 0, spec);
    EXPECT_FALSE(neg.event_onset_s.has_value());
  }
}

TEST(GenerateClip, Deterministic) {
  const SynthSpec spec = SynthSpec::hard();
  EXPECT_EQ(generate_clip(5, 1, spec).wave.samples, generate_clip(5, 1, spec).wave.samples);
  EXPECT_NE(generate_clip(5, 1, spec).wave.samples, generate_clip(6, 1, spec).wave.samples);
}

TEST(EventTemplate, UnitRms) {
  for (EventKind k : {EventKind::kChirp, EventKind::kToneTriad}) {
    const auto t = event_template(k, 0.75);
    EXPECT_EQ(t.size(), 12000u);
    EXPECT_NEAR(signal_power(t), 1.0, 1e-9);
  }
}

TEST(GenerateDataset, ClassCounts) {
  const SynthSpec spec;
  EXPECT_EQ(positive_count(100, spec), 43);
  EXPECT_EQ(positive_count(2, spec), 1);
  SynthSpec shorter;
  shorter.clip_seconds = 2.5;
  testing::ScratchDir dir("synth");
  const SynthSummary s = generate_dataset(2, shorter, dir.path(), 1);
  EXPECT_EQ(s.positives, 1);
  EXPECT_EQ(s.negatives, 1);
  EXPECT_THROW(generate_dataset(1, shorter, dir / "one", 1), ConfigError);
}

TEST(GenerateDataset, ParsesBackWithGroundTruth) {
  SynthSpec spec;
  spec.clip_seconds = 2.5;
  testing::ScratchDir dir("synth");
  const SynthSummary s = generate_dataset(100, spec, dir.path(), 7);
  EXPECT_EQ(s.positives, 43);
  EXPECT_EQ(s.negatives, 57);
  const Manifest m = parse_manifest_dir(dir.path());
  EXPECT_EQ(m, s.manifest);
  int pos = 0;
  for (const auto& r : m.records) pos += r.label;
  EXPECT_EQ(pos, 43);

  std::ifstream gt(dir / "events.gt");
  std::string line;
  int lines = 0;
  while (std::getline(gt, line)) {
    std::istringstream in(line);
    std::string id, onset;
    in >> id >> onset;
    const UtteranceRecord* r = m.find(id);
    ASSERT_NE(r, nullptr) << id;
    EXPECT_EQ(onset == "none", r->label == 0) << line;
    if (r->label == 1) {
      double dur = 0;
      in >> dur;
      EXPECT_LE(std::stod(onset) + dur, 2.5 + 1e-4);
    }
    ++lines;
  }
  EXPECT_EQ(lines, 100);

  testing::ScratchDir again("synth");
  generate_dataset(100, spec, again.path(), 7);
  for (const auto& r : m.records) {
    const auto name = std::filesystem::path(r.wav_path).filename().string();
    EXPECT_EQ(testing::slurp(dir / "wav" / name), testing::slurp(again / "wav" / name));
  }
}

TEST(SynthSpec, Validation) {
  SynthSpec s;
  EXPECT_NO_THROW(s.validate());
  s.event_duration_s = {0.5, 20.0};
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.positive_fraction = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.rate = 8000;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(event_kind_from_string(to_string(EventKind::kToneTriad)), EventKind::kToneTriad);
  EXPECT_EQ(to_json(synth_spec_from_json(to_json(SynthSpec::hard()))), to_json(SynthSpec::hard()));
}

// The learning task must be solvable: a matched filter for the sweep, with
// its threshold fitted on held-out clips, separates the classes.
double matched_filter_f1(const SynthSpec& spec, std::uint64_t seed) {
  const testing::ChirpDetector detector;
  auto scores = [&](const std::string& tag, int n, std::vector<int>& labels) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
      const int label = i % 2;
      labels.push_back(label);
      out.push_back(detector.score(generate_clip(derive_seed(seed, tag, i), label, spec).wave));
    }
    return out;
  };
  std::vector<int> cal_labels, test_labels;
  const std::vector<double> cal = scores("calibrate", 50, cal_labels);
  // Threshold: best calibration F1, midpoint between neighbouring scores.
  std::vector<double> sorted = cal;
  std::sort(sorted.begin(), sorted.end());
  double best_f1 = -1.0, threshold = 0.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double t = 0.5 * (sorted[i] + sorted[i + 1]);
    ConfusionCounts c;
    for (std::size_t k = 0; k < cal.size(); ++k) c = accumulate(c, cal[k] > t, cal_labels[k]);
    if (f1(c) > best_f1) {
      best_f1 = f1(c);
      threshold = t;
    }
  }
  const std::vector<double> test = scores("evaluate", 100, test_labels);
  ConfusionCounts c;
  for (std::size_t k = 0; k < test.size(); ++k) c = accumulate(c, test[k] > threshold, test_labels[k]);
  return f1(c);
}

TEST(MatchedFilter, EasyPresetIsSeparable) {
  EXPECT_GE(matched_filter_f1(SynthSpec::easy(), 1), 0.99);
}

TEST(MatchedFilter, HardPresetIsSeparable) {
  EXPECT_GE(matched_filter_f1(SynthSpec::hard(), 2), 0.99);
}

}  // namespace
}  // namespace eslu
