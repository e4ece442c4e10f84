// eslu/synth.hpp

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

// Synthetic long-clip corpus: colored background noise in every clip, one
// short target event in positives, steady-tone distractors in negatives.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eslu/audio.hpp"
#include "eslu/manifest.hpp"

namespace eslu {

enum class EventKind { kChirp, kToneTriad };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthSpec {
  double clip_seconds = 15.0;
  int rate = kSampleRate;
  // 22578 / 52446 abnormal clips in the reference corpus.
  double positive_fraction = 0.4305;
  Range event_duration_s{0.5, 2.0};
  EventKind event_kind = EventKind::kChirp;
  Range event_snr_db{0.0, 15.0};
  Range distractor_count{0.0, 2.0};  // integers, inclusive
  Range distractor_hz{2200.0, 3800.0};
  double background_rms = 0.05;
  double background_pole = 0.9;  // one-pole low-pass coloring, 0 = white
  int num_speakers = 10;

  static SynthSpec easy();
  static SynthSpec hard();
  static SynthSpec preset(const std::string& name);

  /// Throws ConfigError when the spec is inconsistent.
  void validate() const;
};

/// Sweep 400 -> 1600 Hz for the chirp; fixed 600/900/1200 Hz sequence for
/// the triad.
inline constexpr double kChirpStartHz = 400.0;
inline constexpr double kChirpEndHz = 1600.0;

/// Unit-RMS event waveform of the given duration (raised-cosine edges).
std::vector<double> event_template(EventKind kind, double duration_s, int rate = kSampleRate);

struct SynthClip {
  Waveform wave;
  std::optional<double> event_onset_s;  // positives only
  double event_duration_s = 0.0;
};

SynthClip generate_clip(std::uint64_t seed, int label, const SynthSpec& spec);

/// Number of positives in an n-clip dataset: round(n * positive_fraction).
int positive_count(int n, const SynthSpec& spec);

struct SynthSummary {
  int positives = 0;
  int negatives = 0;
  Manifest manifest;
};

/// Writes out_dir/{wav/*.wav, wav.scp, utt2spk, spk2utt, labels, events.gt}.
SynthSummary generate_dataset(int n, const SynthSpec& spec, const std::filesystem::path& out_dir,
                              std::uint64_t seed);

}  // namespace eslu
