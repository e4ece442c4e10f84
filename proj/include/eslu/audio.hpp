// eslu/audio.hpp

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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace eslu {

inline constexpr int kSampleRate = 16000;

/// Mono audio. Amplitudes are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws ValidationError unless the waveform is nonempty, finite and at
/// 16 kHz.
void validate_waveform(const Waveform& w);

/// Reads a RIFF/WAVE file holding 16-bit PCM, one channel, 16 kHz. Any other
/// layout is rejected; nothing is resampled or downmixed.
Waveform read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono at w.sample_rate. Samples outside
/// [-1.0001, 1.0001] are rejected.
void write_wav(const Waveform& w, const std::filesystem::path& path);

/// PCM quantizer shared by write_wav: round half away from zero of s * 32768,
/// saturated to the int16 range.
std::int16_t quantize_sample(double s);

/// Exact inverse scale used by read_wav.
inline double dequantize_sample(std::int16_t pcm) { return pcm / 32768.0; }

/// Mean square of the samples.
double signal_power(std::span<const double> x);

/// max |x_i|, 0 for an empty span.
double peak_abs(std::span<const double> x);

}  // namespace eslu
