// eslu/features.hpp

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

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "eslu/audio.hpp"
#include "eslu/matrix.hpp"

namespace eslu {

/**
 * Log mel filterbank parameters. Defaults follow the common ESPnet/Kaldi
 * front end: 25 ms Hamming frames every 10 ms, 512-point FFT, 80 HTK-scale
 * mel bands between 20 Hz and 7600 Hz.
 */
struct FbankConfig {
  double frame_len_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_mels = 80;
  int fft_size = 512;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
  double mel_low_hz = 20.0;
  double mel_high_hz = 7600.0;

  int frame_len_samples() const;
  int frame_shift_samples() const;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// T x D frame-level features. Row t holds frame t. Values produced by fbank
/// are rounded to single precision, the precision of the feature archive.
struct FeatureMatrix {
  Matrix data;
  double frame_shift_ms = 10.0;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

/// Number of full frames: 1 + floor((n - frame_len) / shift).
int frame_count(std::size_t n_samples, const FbankConfig& cfg);

inline double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

/// Triangular filters on the HTK mel scale, evaluated at the FFT bin
/// frequencies. weights() is num_mels x (fft_size / 2 + 1).
class MelFilterbank {
 public:
  explicit MelFilterbank(const FbankConfig& cfg);

  const Eigen::MatrixXd& weights() const { return weights_; }
  double center_hz(int mel_bin) const;
  int num_mels() const { return static_cast<int>(weights_.rows()); }

 private:
  Eigen::MatrixXd weights_;
  std::vector<double> centers_mel_;
};

/// Reusable extractor. Owns an FFT plan, so one instance per thread.
class FbankComputer {
 public:
  explicit FbankComputer(const FbankConfig& cfg);
  ~FbankComputer();
  FbankComputer(const FbankComputer&) = delete;
  FbankComputer& operator=(const FbankComputer&) = delete;

  FeatureMatrix compute(const Waveform& w) const;

  /// Mel energies (before the log) of one raw frame of frame_len samples.
  std::vector<double> frame_energies(std::span<const double> frame) const;

  const FbankConfig& config() const { return cfg_; }
  const MelFilterbank& filterbank() const { return filterbank_; }

 private:
  struct Fft;
  FbankConfig cfg_;
  MelFilterbank filterbank_;
  std::vector<double> window_;
  std::unique_ptr<Fft> fft_;
};

/// Convenience wrapper around FbankComputer.
FeatureMatrix fbank(const Waveform& w, const FbankConfig& cfg = {});

/// Subtracts the per-dimension mean over frames.
FeatureMatrix mean_normalize(const FeatureMatrix& f);

}  // namespace eslu
