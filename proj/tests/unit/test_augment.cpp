// eslu/tests/unit/test_augment.cpp

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

#include <cmath>

#include "eslu/augment.hpp"
#include "eslu/error.hpp"
#include "eslu/rng.hpp"
#include "oracles.hpp"

namespace eslu {
namespace {

Waveform random_wave(std::size_t n, std::uint64_t seed, double amp = 0.3) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.uniform(-amp, amp);
  return w;
}

double power_of_difference(const Waveform& a, const Waveform& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
  return acc / static_cast<double>(a.size());
}

TEST(AddNoise, ZeroDbEqualisesPower) {
  const Waveform clean = random_wave(8000, 1), noise = random_wave(20000, 2, 0.05);
  const Waveform mix = add_noise_at_snr(clean, noise, 0.0, 7, false);
  EXPECT_NEAR(power_of_difference(mix, clean) / signal_power(clean.samples), 1.0, 1e-9);
}

TEST(AddNoise, MeasuredSnrMatchesRequest) {
  for (double snr : {-5.0, 0.0, 10.0, 20.0}) {
    const Waveform clean = random_wave(16000, 3), noise = random_wave(16000, 4, 0.8);
    const Waveform mix = add_noise_at_snr(clean, noise, snr, 9, false);
    const double measured =
        10.0 * std::log10(signal_power(clean.samples) / power_of_difference(mix, clean));
    EXPECT_NEAR(measured, snr, 1e-6);
  }
}

TEST(AddNoise, ZeroNoiseAndZeroCleanFail) {
  Waveform zero;
  zero.samples.assign(100, 0.0);
  EXPECT_THROW(add_noise_at_snr(random_wave(100, 1), zero, 5.0, 1), ValidationError);
  EXPECT_THROW(add_noise_at_snr(zero, random_wave(100, 1), 5.0, 1), ValidationError);
  EXPECT_THROW(add_noise_at_snr(random_wave(100, 1), random_wave(100, 2), NAN, 1),
               ValidationError);
}

TEST(AddNoise, DeterministicAndLengthPreserving) {
  const Waveform clean = random_wave(5000, 1), noise = random_wave(1234, 2);  // tiled
  const Waveform a = add_noise_at_snr(clean, noise, 3.0, 42);
  const Waveform b = add_noise_at_snr(clean, noise, 3.0, 42);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.size(), clean.size());
  const Waveform c = add_noise_at_snr(clean, noise, 3.0, 43);
  EXPECT_NE(a.samples, c.samples);
}

TEST(AddNoise, PeakNormalisesClippingMixtures) {
  const Waveform clean = random_wave(4000, 1, 0.95), noise = random_wave(4000, 2, 0.9);
  const Waveform mix = add_noise_at_snr(clean, noise, -10.0, 1);
  EXPECT_NEAR(peak_abs(mix.samples), 1.0, 1e-12);
}

TEST(Reverberate, UnitImpulseIsIdentity) {
  const Waveform x = random_wave(3000, 5);
  const Waveform y = reverberate(x, {{1.0}, 16000});
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.samples[i], x.samples[i], 1e-12);
}

TEST(Reverberate, DelayedImpulseShifts) {
  const Waveform x = random_wave(3000, 6);
  RoomImpulseResponse rir{std::vector<double>(6, 0.0), 16000};
  rir.taps[5] = 0.5;
  const Waveform y = reverberate(x, rir, false);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(y.samples[i], 0.0, 1e-12);
  for (std::size_t i = 5; i < x.size(); ++i) EXPECT_NEAR(y.samples[i], 0.5 * x.samples[i - 5], 1e-12);
}

TEST(Reverberate, MatchesDirectConvolution) {
  const Waveform x = random_wave(8000, 7);
  const RoomImpulseResponse rir = synthetic_rir(0.2, 3);
  ASSERT_EQ(rir.taps.size(), 3200u);
  const Waveform y = reverberate(x, rir);
  std::vector<double> ref = testing::direct_convolve(x.samples, rir.taps, x.size());
  const double scale = peak_abs(x.samples) / peak_abs(ref);
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(y.samples[i] - scale * ref[i]));
  EXPECT_LT(worst, 1e-9);
  EXPECT_NEAR(peak_abs(y.samples), peak_abs(x.samples), 1e-12);
}

TEST(Reverberate, LinearBeforeNormalisation) {
  const Waveform x = random_wave(2000, 8);
  Waveform x3 = x;
  for (auto& s : x3.samples) s *= 3.0;
  const RoomImpulseResponse rir = synthetic_rir(0.1, 4);
  const Waveform a = reverberate(x, rir, false), b = reverberate(x3, rir, false);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(b.samples[i], 3.0 * a.samples[i], 1e-12);
}

TEST(Reverberate, RejectsBadRir) {
  const Waveform x = random_wave(100, 1);
  EXPECT_THROW(reverberate(x, {{}, 16000}), ValidationError);
  EXPECT_THROW(reverberate(x, {{0.0, 0.0}, 16000}), ValidationError);
  EXPECT_THROW(reverberate(x, {{1.0}, 8000}), ValidationError);
}

TEST(FftConvolve, MatchesDirect) {
  const Waveform x = random_wave(777, 1), h = random_wave(95, 2);
  const auto a = fft_convolve(x.samples, h.samples, 777 + 94);
  const auto b = testing::direct_convolve(x.samples, h.samples, 777 + 94);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(SyntheticRir, DecaysAndIsSeeded) {
  const RoomImpulseResponse a = synthetic_rir(0.4, 1), b = synthetic_rir(0.4, 1);
  EXPECT_EQ(a.taps, b.taps);
  EXPECT_EQ(a.taps[0], 1.0);
  EXPECT_EQ(a.taps.size(), 6400u);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 1; i < 800; ++i) head += a.taps[i] * a.taps[i];
  for (std::size_t i = 5600; i < 6400; ++i) tail += a.taps[i] * a.taps[i];
  EXPECT_GT(head, 100.0 * tail);
  EXPECT_THROW(synthetic_rir(0.0, 1), ConfigError);
}

}  // namespace
}  // namespace eslu
