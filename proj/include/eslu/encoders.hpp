// eslu/encoders.hpp

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

// Frozen acoustic encoders. Each one maps a T x F filterbank matrix to a
// ceil(T / stride) x output_dim representation; an ensemble concatenates
// several of them on a common time base.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eslu/archive.hpp"
#include "eslu/features.hpp"
#include "eslu/nn.hpp"

namespace eslu {

enum class EncoderKind { kFrozenProjection, kFrozenRecurrent, kPrecomputed };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& s);

struct EncoderSpec {
  std::string id = "A";
  EncoderKind kind = EncoderKind::kFrozenProjection;
  int output_dim = 1024;
  int frame_stride = 1;
  std::uint64_t init_seed = 0;
  std::string feature_scp;  // precomputed only
  // Input feature columns [band_first, band_first + band_count); a count of
  // 0 means every column from band_first on.
  int band_first = 0;
  int band_count = 0;

  void validate() const;
};

struct EncoderOutput {
  Matrix data;     // T' x output_dim
  int stride = 1;  // input frames per output row
};

/// Rows after striding: ceil(frames / stride).
inline Eigen::Index strided_rows(Eigen::Index frames, int stride) {
  return (frames + stride - 1) / stride;
}

class Encoder {
 public:
  virtual ~Encoder() = default;

  /// `utt_id` is only consulted by precomputed encoders.
  virtual EncoderOutput encode(const FeatureMatrix& features, const std::string& utt_id) const = 0;

  /// Registers the frozen weights (non-trainable) for checkpointing.
  virtual void collect(nn::ParameterSet&) {}

  const EncoderSpec& spec() const { return spec_; }

 protected:
  explicit Encoder(EncoderSpec spec) : spec_(std::move(spec)) {}
  Matrix select_band(const FeatureMatrix& features) const;
  Eigen::Index band_width(Eigen::Index input_dim) const;

  EncoderSpec spec_;
};

/// Stacks `stride` consecutive frames (zero padded at the end), applies a
/// fixed affine map and tanh.
class FrozenProjectionEncoder : public Encoder {
 public:
  FrozenProjectionEncoder(EncoderSpec spec, Eigen::Index input_dim);
  /// Explicit weights: output_dim x (band width * stride), bias 1 x output_dim.
  FrozenProjectionEncoder(EncoderSpec spec, Matrix weight, RowVector bias);

  EncoderOutput encode(const FeatureMatrix& features, const std::string& utt_id) const override;
  void collect(nn::ParameterSet& set) override {
    set.add(weight_);
    set.add(bias_);
  }

 private:
  nn::Parameter weight_;
  nn::Parameter bias_;
};

/// Unidirectional LSTM with fixed seeded weights; emits every stride-th
/// hidden state starting at frame 0.
class FrozenRecurrentEncoder : public Encoder {
 public:
  FrozenRecurrentEncoder(EncoderSpec spec, Eigen::Index input_dim);

  EncoderOutput encode(const FeatureMatrix& features, const std::string& utt_id) const override;
  void collect(nn::ParameterSet& set) override { lstm_.collect(set); }

 private:
  nn::LstmParams lstm_;
};

/// Loads externally computed encoder outputs verbatim from an .scp index.
class PrecomputedEncoder : public Encoder {
 public:
  explicit PrecomputedEncoder(EncoderSpec spec);

  EncoderOutput encode(const FeatureMatrix& features, const std::string& utt_id) const override;

 private:
  std::map<std::string, ArchiveIndexEntry> index_;
};

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec, Eigen::Index input_dim);

/// Brings every output to the finest stride by row repetition, truncates to
/// the shortest, and concatenates along features in argument order. Throws
/// ValidationError when pre-truncation lengths (in input frames) differ by
/// more than the largest stride, or when strides are not multiples of the
/// finest one.
EncoderOutput align_and_concat(std::span<const EncoderOutput> outputs);

inline EncoderOutput align_and_concat(const EncoderOutput& a, const EncoderOutput& b) {
  const EncoderOutput both[] = {a, b};
  return align_and_concat(both);
}

}  // namespace eslu
