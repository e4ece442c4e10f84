// eslu/augment.hpp

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
#include <span>
#include <vector>

#include "eslu/audio.hpp"

namespace eslu {

struct RoomImpulseResponse {
  std::vector<double> taps;
  int sample_rate = kSampleRate;
};

/// Throws ValidationError for an empty, all-zero, non-finite or non-16 kHz
/// response.
void validate_rir(const RoomImpulseResponse& rir);

/// Mixes `noise` into `clean` so that 10 log10(P_clean / P_noise) == snr_db.
///
/// A clean-length noise segment starts at a seeded random offset; shorter
/// noise is tiled cyclically. When peak_normalize is set and the mixture
/// clips, the whole mixture is scaled down to a peak of 1.
Waveform add_noise_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                          std::uint64_t seed, bool peak_normalize = true);

/// Convolves with the RIR, truncating to the input length. When
/// peak_normalize is set the output peak is matched to the input peak.
Waveform reverberate(const Waveform& signal, const RoomImpulseResponse& rir,
                     bool peak_normalize = true);

/// Full linear convolution of x and h via FFT, first `keep` outputs.
std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h,
                                 std::size_t keep);

/// Direct path plus an exponentially decaying seeded noise tail that falls
/// by 60 dB over rt60_seconds. The response is rt60_seconds long.
RoomImpulseResponse synthetic_rir(double rt60_seconds, std::uint64_t seed);

}  // namespace eslu
