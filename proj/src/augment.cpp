// eslu/augment.cpp

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

#include "eslu/augment.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu {

void validate_rir(const RoomImpulseResponse& rir) {
  if (rir.sample_rate != kSampleRate) throw ValidationError("RIR sample rate must be 16000 Hz");
  if (rir.taps.empty()) throw ValidationError("RIR has no taps");
  bool nonzero = false;
  for (double t : rir.taps) {
    if (!std::isfinite(t)) throw ValidationError("RIR has a non-finite tap");
    nonzero = nonzero || t != 0.0;
  }
  if (!nonzero) throw ValidationError("RIR is all zeros");
}

Waveform add_noise_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                          std::uint64_t seed, bool peak_normalize) {
  validate_waveform(clean);
  validate_waveform(noise);
  if (!std::isfinite(snr_db)) throw ValidationError("snr_db must be finite");
  const double p_clean = signal_power(clean.samples);
  if (p_clean <= 0.0) throw ValidationError("clean signal has zero power");
  if (signal_power(noise.samples) <= 0.0) throw ValidationError("noise has zero power");

  const std::size_t n = clean.size();
  const std::size_t n_noise = noise.size();
  Rng rng(seed);
  std::vector<double> segment(n);
  if (n_noise >= n) {
    const auto offset = static_cast<std::size_t>(rng.below(n_noise - n + 1));
    std::copy_n(noise.samples.begin() + static_cast<std::ptrdiff_t>(offset), n,
                segment.begin());
  } else {
    const auto offset = static_cast<std::size_t>(rng.below(n_noise));
    for (std::size_t i = 0; i < n; ++i) segment[i] = noise.samples[(offset + i) % n_noise];
  }
  const double p_segment = signal_power(segment);
  if (p_segment <= 0.0) throw ValidationError("selected noise segment has zero power");

  const double gain = std::sqrt(p_clean / (p_segment * std::pow(10.0, snr_db / 10.0)));
  Waveform out;
  out.sample_rate = clean.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = clean.samples[i] + gain * segment[i];

  if (peak_normalize) {
    const double peak = peak_abs(out.samples);
    if (peak > 1.0) {
      for (double& s : out.samples) s /= peak;
    }
  }
  return out;
}

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h,
                                 std::size_t keep) {
  if (x.empty() || h.empty()) return std::vector<double>(keep, 0.0);
  const std::size_t full = x.size() + h.size() - 1;
  std::size_t n = 1;
  while (n < full) n <<= 1;
  const std::size_t n_bins = n / 2 + 1;

  double* buf = fftw_alloc_real(n);
  auto* xs = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_bins));
  auto* hs = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_bins));
  const int size = static_cast<int>(n);
  fftw_plan fwd_x = fftw_plan_dft_r2c_1d(size, buf, reinterpret_cast<fftw_complex*>(xs),
                                         FFTW_ESTIMATE);
  fftw_plan fwd_h = fftw_plan_dft_r2c_1d(size, buf, reinterpret_cast<fftw_complex*>(hs),
                                         FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_c2r_1d(size, reinterpret_cast<fftw_complex*>(xs), buf,
                                       FFTW_ESTIMATE);

  std::fill(buf, buf + n, 0.0);
  std::copy(x.begin(), x.end(), buf);
  fftw_execute(fwd_x);
  std::fill(buf, buf + n, 0.0);
  std::copy(h.begin(), h.end(), buf);
  fftw_execute(fwd_h);
  for (std::size_t k = 0; k < n_bins; ++k) xs[k] *= hs[k];
  fftw_execute(inv);  // destroys xs

  std::vector<double> out(keep, 0.0);
  const std::size_t m = std::min(keep, full);
  for (std::size_t i = 0; i < m; ++i) out[i] = buf[i] / static_cast<double>(n);

  fftw_destroy_plan(fwd_x);
  fftw_destroy_plan(fwd_h);
  fftw_destroy_plan(inv);
  fftw_free(buf);
  fftw_free(xs);
  fftw_free(hs);
  return out;
}

Waveform reverberate(const Waveform& signal, const RoomImpulseResponse& rir,
                     bool peak_normalize) {
  validate_waveform(signal);
  validate_rir(rir);
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples = fft_convolve(signal.samples, rir.taps, signal.size());
  if (peak_normalize) {
    const double in_peak = peak_abs(signal.samples);
    const double out_peak = peak_abs(out.samples);
    if (out_peak > 0.0) {
      const double scale = in_peak / out_peak;
      for (double& s : out.samples) s *= scale;
    }
  }
  return out;
}

RoomImpulseResponse synthetic_rir(double rt60_seconds, std::uint64_t seed) {
  if (!(rt60_seconds > 0.0) || !std::isfinite(rt60_seconds)) {
    throw ConfigError("rt60 must be positive");
  }
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(rt60_seconds * kSampleRate)));
  Rng rng(seed);
  RoomImpulseResponse rir;
  rir.taps.resize(n);
  rir.taps[0] = 1.0;
  // exp(-decay * t) reaches -60 dB at t = rt60.
  const double decay = 3.0 * std::log(10.0) / rt60_seconds;
  for (std::size_t i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    rir.taps[i] = 0.3 * rng.normal() * std::exp(-decay * t);
  }
  return rir;
}

}  // namespace eslu
