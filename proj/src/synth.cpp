// eslu/synth.cpp

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

#include "eslu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu {

namespace fs = std::filesystem;

namespace {

constexpr double kEdgeSeconds = 0.01;

void taper_and_normalize(std::vector<double>& x, int rate) {
  const auto edge = std::min(x.size() / 2, static_cast<std::size_t>(kEdgeSeconds * rate));
  for (std::size_t i = 0; i < edge; ++i) {
    const double w = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / static_cast<double>(edge));
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
  const double rms = std::sqrt(signal_power(x));
  if (rms > 0.0) {
    for (double& v : x) v /= rms;
  }
}

std::vector<double> steady_tone(double hz, double duration_s, double phase, int rate) {
  std::vector<double> x(static_cast<std::size_t>(std::lround(duration_s * rate)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::sin(2.0 * M_PI * hz * static_cast<double>(i) / rate + phase);
  }
  taper_and_normalize(x, rate);
  return x;
}

/// Adds `unit` scaled so that its power is snr_db above the power of `base`
/// over the same span.
void mix_in(std::vector<double>& base, const std::vector<double>& unit, std::size_t start,
            double snr_db) {
  const std::span<const double> span(base.data() + start, unit.size());
  const double p_local = signal_power(span);
  const double amp = std::sqrt(p_local * std::pow(10.0, snr_db / 10.0));
  for (std::size_t i = 0; i < unit.size(); ++i) base[start + i] += amp * unit[i];
}

int draw_count(Rng& rng, Range r) {
  const auto lo = static_cast<int>(std::lround(r.lo));
  const auto hi = static_cast<int>(std::lround(r.hi));
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

std::string to_string(EventKind kind) {
  return kind == EventKind::kChirp ? "chirp" : "tone_triad";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "chirp") return EventKind::kChirp;
  if (s == "tone_triad") return EventKind::kToneTriad;
  throw ConfigError("unknown event kind '" + s + "'");
}

SynthSpec SynthSpec::easy() { return {}; }

SynthSpec SynthSpec::hard() {
  SynthSpec s;
  s.event_snr_db = {-5.0, 5.0};
  s.distractor_count = {1.0, 3.0};
  // In-band steady tones: only the sweep separates the classes.
  s.distractor_hz = {kChirpStartHz, kChirpEndHz};
  return s;
}

SynthSpec SynthSpec::preset(const std::string& name) {
  if (name == "easy") return easy();
  if (name == "hard") return hard();
  throw ConfigError("unknown preset '" + name + "' (expected easy or hard)");
}

void SynthSpec::validate() const {
  if (rate != kSampleRate) throw ConfigError("synth: rate must be 16000");
  if (!(clip_seconds > 0.0)) throw ConfigError("synth: clip_seconds must be positive");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) {
    throw ConfigError("synth: positive_fraction must lie in (0, 1)");
  }
  if (!(event_duration_s.lo > 0.0 && event_duration_s.lo <= event_duration_s.hi)) {
    throw ConfigError("synth: invalid event duration range");
  }
  if (event_duration_s.hi > clip_seconds) throw ConfigError("synth: event longer than clip");
  if (event_snr_db.lo > event_snr_db.hi) throw ConfigError("synth: invalid snr range");
  if (distractor_count.lo < 0 || distractor_count.lo > distractor_count.hi) {
    throw ConfigError("synth: invalid distractor count range");
  }
  if (!(distractor_hz.lo > 0.0 && distractor_hz.lo <= distractor_hz.hi &&
        distractor_hz.hi < rate / 2.0)) {
    throw ConfigError("synth: invalid distractor frequency range");
  }
  if (!(background_rms > 0.0 && background_rms < 0.3)) {
    throw ConfigError("synth: background_rms must lie in (0, 0.3)");
  }
  if (!(background_pole >= 0.0 && background_pole < 1.0)) {
    throw ConfigError("synth: background_pole must lie in [0, 1)");
  }
  if (num_speakers < 1) throw ConfigError("synth: num_speakers must be >= 1");
}

std::vector<double> event_template(EventKind kind, double duration_s, int rate) {
  const auto n = static_cast<std::size_t>(std::lround(duration_s * rate));
  std::vector<double> x(n);
  if (kind == EventKind::kChirp) {
    const double sweep = (kChirpEndHz - kChirpStartHz) / duration_s;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      x[i] = std::sin(2.0 * M_PI * (kChirpStartHz * t + 0.5 * sweep * t * t));
    }
  } else {
    const double tones[3] = {600.0, 900.0, 1200.0};
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t seg = std::min<std::size_t>(2, 3 * i / n);
      phase += 2.0 * M_PI * tones[seg] / rate;
      x[i] = std::sin(phase);
    }
  }
  taper_and_normalize(x, rate);
  return x;
}

SynthClip generate_clip(std::uint64_t seed, int label, const SynthSpec& spec) {
  spec.validate();
  if (label != 0 && label != 1) throw ConfigError("synth: label must be 0 or 1");
  Rng rng(derive_seed(seed, label == 1 ? "clip-positive" : "clip-negative"));
  const auto n = static_cast<std::size_t>(std::lround(spec.clip_seconds * spec.rate));

  std::vector<double> x(n);
  double state = 0.0;
  for (auto& v : x) {
    state = spec.background_pole * state + rng.normal();
    v = state;
  }
  const double scale = spec.background_rms / std::sqrt(signal_power(x));
  for (auto& v : x) v *= scale;

  SynthClip clip;
  auto place = [&](double duration) {
    const double onset = rng.uniform(0.0, spec.clip_seconds - duration);
    auto start = static_cast<std::size_t>(std::lround(onset * spec.rate));
    const auto len = static_cast<std::size_t>(std::lround(duration * spec.rate));
    start = std::min(start, n - len);
    return start;
  };

  if (label == 1) {
    const double duration = rng.uniform(spec.event_duration_s.lo, spec.event_duration_s.hi);
    const std::vector<double> event = event_template(spec.event_kind, duration, spec.rate);
    const std::size_t start = place(duration);
    mix_in(x, event, start, rng.uniform(spec.event_snr_db.lo, spec.event_snr_db.hi));
    clip.event_onset_s = static_cast<double>(start) / spec.rate;
    clip.event_duration_s = static_cast<double>(event.size()) / spec.rate;
  } else {
    const int count = draw_count(rng, spec.distractor_count);
    for (int k = 0; k < count; ++k) {
      const double hz = rng.uniform(spec.distractor_hz.lo, spec.distractor_hz.hi);
      const double duration = rng.uniform(spec.event_duration_s.lo, spec.event_duration_s.hi);
      const std::vector<double> tone = steady_tone(hz, duration, rng.uniform(0.0, 2.0 * M_PI),
                                                   spec.rate);
      const std::size_t start = place(duration);
      mix_in(x, tone, start, rng.uniform(spec.event_snr_db.lo, spec.event_snr_db.hi));
    }
  }

  const double peak = peak_abs(x);
  if (peak > 0.99) {
    for (auto& v : x) v *= 0.99 / peak;
  }
  clip.wave.samples = std::move(x);
  clip.wave.sample_rate = spec.rate;
  return clip;
}

int positive_count(int n, const SynthSpec& spec) {
  return static_cast<int>(std::lround(n * spec.positive_fraction));
}

SynthSummary generate_dataset(int n, const SynthSpec& spec, const fs::path& out_dir,
                              std::uint64_t seed) {
  if (n < 2) throw ConfigError("synth: n must be >= 2, got " + std::to_string(n));
  spec.validate();
  const int positives = positive_count(n, spec);
  if (positives < 1 || positives >= n) {
    throw ConfigError("synth: n and positive_fraction leave a class empty");
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill_n(labels.begin(), positives, 1);
  Rng rng(derive_seed(seed, "dataset-labels"));
  rng.shuffle(std::span<int>(labels));

  std::error_code ec;
  const fs::path root = fs::absolute(out_dir).lexically_normal();
  fs::create_directories(root / "wav", ec);
  if (ec) throw IoError("cannot create " + (root / "wav").string() + ": " + ec.message());

  SynthSummary summary;
  summary.positives = positives;
  summary.negatives = n - positives;
  std::vector<std::string> gt_lines;
  for (int i = 0; i < n; ++i) {
    char spk[32], utt[64];
    std::snprintf(spk, sizeof spk, "spk%03d", i % spec.num_speakers);
    std::snprintf(utt, sizeof utt, "%s-utt%06d", spk, i);
    const int label = labels[static_cast<std::size_t>(i)];
    const SynthClip clip = generate_clip(derive_seed(seed, "clip", static_cast<std::uint64_t>(i)),
                                         label, spec);
    const fs::path wav_path = root / "wav" / (std::string(utt) + ".wav");
    write_wav(clip.wave, wav_path);
    summary.manifest.records.push_back({utt, wav_path.string(), spk, label});

    char line[160];
    if (clip.event_onset_s) {
      std::snprintf(line, sizeof line, "%s %.4f %.4f", utt, *clip.event_onset_s,
                    clip.event_duration_s);
    } else {
      std::snprintf(line, sizeof line, "%s none", utt);
    }
    gt_lines.emplace_back(line);
  }
  write_manifest_dir(summary.manifest, root);
  summary.manifest.normalize();

  std::sort(gt_lines.begin(), gt_lines.end());
  std::ofstream gt(root / "events.gt", std::ios::trunc);
  if (!gt) throw IoError("cannot write " + (root / "events.gt").string());
  for (const auto& l : gt_lines) gt << l << '\n';
  if (!gt) throw IoError("write failed: events.gt");
  return summary;
}

}  // namespace eslu
