// eslu/features.cpp

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

#include "eslu/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "eslu/error.hpp"

namespace eslu {

int FbankConfig::frame_len_samples() const {
  return static_cast<int>(std::lround(frame_len_ms * kSampleRate / 1000.0));
}

int FbankConfig::frame_shift_samples() const {
  return static_cast<int>(std::lround(frame_shift_ms * kSampleRate / 1000.0));
}

void FbankConfig::validate() const {
  if (frame_len_samples() < 2) throw ConfigError("fbank: frame length too short");
  if (frame_shift_samples() < 1) throw ConfigError("fbank: frame shift must be positive");
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0) {
    throw ConfigError("fbank: fft_size must be a power of two");
  }
  if (frame_len_samples() > fft_size) {
    throw ConfigError("fbank: frame length " + std::to_string(frame_len_samples()) +
                      " samples exceeds fft_size " + std::to_string(fft_size));
  }
  if (num_mels < 2) throw ConfigError("fbank: num_mels must be >= 2");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0)) {
    throw ConfigError("fbank: preemphasis must lie in [0, 1)");
  }
  if (!(log_floor > 0.0)) throw ConfigError("fbank: log_floor must be positive");
  if (!(mel_low_hz >= 0.0 && mel_low_hz < mel_high_hz &&
        mel_high_hz <= kSampleRate / 2.0)) {
    throw ConfigError("fbank: need 0 <= mel_low_hz < mel_high_hz <= 8000");
  }
}

int frame_count(std::size_t n_samples, const FbankConfig& cfg) {
  const auto len = static_cast<std::size_t>(cfg.frame_len_samples());
  const auto shift = static_cast<std::size_t>(cfg.frame_shift_samples());
  if (n_samples < len) {
    throw ValidationError("signal of " + std::to_string(n_samples) +
                          " samples is shorter than one frame (" + std::to_string(len) +
                          ")");
  }
  return static_cast<int>(1 + (n_samples - len) / shift);
}

MelFilterbank::MelFilterbank(const FbankConfig& cfg) {
  cfg.validate();
  const int n_bins = cfg.fft_size / 2 + 1;
  const double mel_low = hz_to_mel(cfg.mel_low_hz);
  const double mel_high = hz_to_mel(cfg.mel_high_hz);
  const double step = (mel_high - mel_low) / (cfg.num_mels + 1);
  const double bin_hz = static_cast<double>(kSampleRate) / cfg.fft_size;

  weights_ = Eigen::MatrixXd::Zero(cfg.num_mels, n_bins);
  centers_mel_.resize(cfg.num_mels);
  for (int m = 0; m < cfg.num_mels; ++m) {
    const double left = mel_low + m * step;
    const double center = left + step;
    const double right = center + step;
    centers_mel_[m] = center;
    for (int k = 0; k < n_bins; ++k) {
      const double mel = hz_to_mel(k * bin_hz);
      if (mel > left && mel < right) {
        weights_(m, k) = mel <= center ? (mel - left) / (center - left)
                                       : (right - mel) / (right - center);
      }
    }
  }
}

double MelFilterbank::center_hz(int mel_bin) const {
  return mel_to_hz(centers_mel_.at(static_cast<std::size_t>(mel_bin)));
}

struct FbankComputer::Fft {
  explicit Fft(int n) : size(n) {
    in = fftw_alloc_real(static_cast<std::size_t>(n));
    out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~Fft() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  int size;
  double* in;
  fftw_complex* out;
  fftw_plan plan;
};

FbankComputer::FbankComputer(const FbankConfig& cfg)
    : cfg_(cfg), filterbank_(cfg), fft_(std::make_unique<Fft>(cfg.fft_size)) {
  const int len = cfg_.frame_len_samples();
  window_.resize(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) {
    window_[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (len - 1));
  }
}

FbankComputer::~FbankComputer() = default;

std::vector<double> FbankComputer::frame_energies(std::span<const double> frame) const {
  const std::size_t len = window_.size();
  if (frame.size() != len) throw ValidationError("frame length mismatch");

  double* buf = fft_->in;
  std::copy(frame.begin(), frame.end(), buf);
  for (std::size_t n = len - 1; n > 0; --n) buf[n] -= cfg_.preemphasis * buf[n - 1];
  buf[0] -= cfg_.preemphasis * buf[0];
  for (std::size_t n = 0; n < len; ++n) buf[n] *= window_[n];
  std::fill(buf + len, buf + fft_->size, 0.0);

  fftw_execute(fft_->plan);

  const int n_bins = fft_->size / 2 + 1;
  Eigen::VectorXd power(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    power[k] = fft_->out[k][0] * fft_->out[k][0] + fft_->out[k][1] * fft_->out[k][1];
  }
  const Eigen::VectorXd mel = filterbank_.weights() * power;
  return {mel.data(), mel.data() + mel.size()};
}

FeatureMatrix FbankComputer::compute(const Waveform& w) const {
  validate_waveform(w);
  const int frames = frame_count(w.samples.size(), cfg_);
  const int len = cfg_.frame_len_samples();
  const int shift = cfg_.frame_shift_samples();

  FeatureMatrix out;
  out.frame_shift_ms = cfg_.frame_shift_ms;
  out.data.resize(frames, cfg_.num_mels);
  for (int t = 0; t < frames; ++t) {
    const std::span<const double> frame(w.samples.data() + static_cast<std::size_t>(t) * shift,
                                        static_cast<std::size_t>(len));
    const std::vector<double> energies = frame_energies(frame);
    for (int m = 0; m < cfg_.num_mels; ++m) {
      const double v = std::log(std::max(energies[m], cfg_.log_floor));
      if (!std::isfinite(v)) {
        throw NumericError("fbank: non-finite value at frame " + std::to_string(t) +
                           ", mel bin " + std::to_string(m));
      }
      out.data(t, m) = static_cast<double>(static_cast<float>(v));
    }
  }
  return out;
}

FeatureMatrix fbank(const Waveform& w, const FbankConfig& cfg) {
  return FbankComputer(cfg).compute(w);
}

FeatureMatrix mean_normalize(const FeatureMatrix& f) {
  FeatureMatrix out = f;
  if (f.rows() == 0) return out;
  const RowVector mean = f.data.colwise().mean();
  out.data.rowwise() -= mean;
  return out;
}

}  // namespace eslu
