// eslu/encoders.cpp

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

#include "eslu/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "eslu/error.hpp"

namespace eslu {

using Eigen::Index;

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kFrozenProjection:
      return "frozen_projection";
    case EncoderKind::kFrozenRecurrent:
      return "frozen_recurrent";
    case EncoderKind::kPrecomputed:
      return "precomputed";
  }
  return "unknown";
}

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "frozen_projection") return EncoderKind::kFrozenProjection;
  if (s == "frozen_recurrent") return EncoderKind::kFrozenRecurrent;
  if (s == "precomputed") return EncoderKind::kPrecomputed;
  throw ConfigError("unknown encoder kind '" + s + "'");
}

void EncoderSpec::validate() const {
  if (id.empty() || id.find_first_of(" \t\n.") != std::string::npos) {
    throw ConfigError("encoder id must be a nonempty token without dots");
  }
  if (output_dim < 1) throw ConfigError("encoder " + id + ": output_dim must be >= 1");
  if (frame_stride < 1) throw ConfigError("encoder " + id + ": frame_stride must be >= 1");
  if (band_first < 0 || band_count < 0) throw ConfigError("encoder " + id + ": invalid band");
  if (kind == EncoderKind::kPrecomputed && feature_scp.empty()) {
    throw ConfigError("encoder " + id + ": precomputed kind needs feature_scp");
  }
}

Index Encoder::band_width(Index input_dim) const {
  const Index width = spec_.band_count > 0 ? spec_.band_count : input_dim - spec_.band_first;
  if (width < 1 || spec_.band_first + width > input_dim) {
    throw ConfigError("encoder " + spec_.id + ": band exceeds the " + std::to_string(input_dim) +
                      "-dim input");
  }
  return width;
}

Matrix Encoder::select_band(const FeatureMatrix& features) const {
  const Index width = band_width(features.dim());
  return features.data.middleCols(spec_.band_first, width);
}

FrozenProjectionEncoder::FrozenProjectionEncoder(EncoderSpec spec, Index input_dim)
    : Encoder(std::move(spec)) {
  spec_.validate();
  const Index fan_in = band_width(input_dim) * spec_.frame_stride;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  const std::string name = "encoder." + spec_.id;
  weight_ = nn::Parameter(
      name + ".weight",
      nn::uniform_init(spec_.output_dim, fan_in, bound, spec_.init_seed, name + ".weight"), false,
      false);
  bias_ = nn::Parameter(name + ".bias",
                        nn::uniform_init(1, spec_.output_dim, bound, spec_.init_seed, name + ".bias"),
                        true, false);
}

FrozenProjectionEncoder::FrozenProjectionEncoder(EncoderSpec spec, Matrix weight, RowVector bias)
    : Encoder(std::move(spec)) {
  spec_.validate();
  if (weight.rows() != spec_.output_dim || bias.size() != spec_.output_dim) {
    throw ConfigError("encoder " + spec_.id + ": weight rows must equal output_dim");
  }
  const std::string name = "encoder." + spec_.id;
  weight_ = nn::Parameter(name + ".weight", std::move(weight), false, false);
  bias_ = nn::Parameter(name + ".bias", Matrix(bias), true, false);
}

EncoderOutput FrozenProjectionEncoder::encode(const FeatureMatrix& features,
                                              const std::string&) const {
  const Matrix band = select_band(features);
  const int stride = spec_.frame_stride;
  const Index width = band.cols();
  if (width * stride != weight_.value.cols()) {
    throw ValidationError("encoder " + spec_.id + ": input width does not match weights");
  }
  const Index out_rows = strided_rows(band.rows(), stride);
  Matrix stacked = Matrix::Zero(out_rows, width * stride);
  for (Index r = 0; r < out_rows; ++r) {
    for (int k = 0; k < stride; ++k) {
      const Index t = r * stride + k;
      if (t < band.rows()) stacked.block(r, k * width, 1, width) = band.row(t);
    }
  }
  EncoderOutput out;
  out.stride = stride;
  out.data = nn::linear(stacked, weight_.value, bias_.value.row(0)).array().tanh();
  return out;
}

FrozenRecurrentEncoder::FrozenRecurrentEncoder(EncoderSpec spec, Index input_dim)
    : Encoder(std::move(spec)) {
  spec_.validate();
  lstm_ = nn::LstmParams("encoder." + spec_.id, band_width(input_dim), spec_.output_dim,
                         spec_.init_seed, false);
}

EncoderOutput FrozenRecurrentEncoder::encode(const FeatureMatrix& features,
                                             const std::string&) const {
  const Matrix h = nn::lstm_forward(select_band(features), lstm_, false, nullptr);
  const int stride = spec_.frame_stride;
  EncoderOutput out;
  out.stride = stride;
  out.data.resize(strided_rows(h.rows(), stride), h.cols());
  for (Index r = 0; r < out.data.rows(); ++r) out.data.row(r) = h.row(r * stride);
  return out;
}

PrecomputedEncoder::PrecomputedEncoder(EncoderSpec spec) : Encoder(std::move(spec)) {
  spec_.validate();
  for (auto& e : read_scp(spec_.feature_scp)) index_.emplace(e.utt_id, e);
}

EncoderOutput PrecomputedEncoder::encode(const FeatureMatrix&, const std::string& utt_id) const {
  auto it = index_.find(utt_id);
  if (it == index_.end()) {
    throw ValidationError("encoder " + spec_.id + ": no precomputed features for " + utt_id);
  }
  FeatureMatrix m = read_feature(it->second);
  if (m.dim() != spec_.output_dim) {
    throw ValidationError("encoder " + spec_.id + ": precomputed features for " + utt_id +
                          " have dim " + std::to_string(m.dim()) + ", expected " +
                          std::to_string(spec_.output_dim));
  }
  return {std::move(m.data), spec_.frame_stride};
}

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec, Index input_dim) {
  switch (spec.kind) {
    case EncoderKind::kFrozenProjection:
      return std::make_unique<FrozenProjectionEncoder>(spec, input_dim);
    case EncoderKind::kFrozenRecurrent:
      return std::make_unique<FrozenRecurrentEncoder>(spec, input_dim);
    case EncoderKind::kPrecomputed:
      return std::make_unique<PrecomputedEncoder>(spec);
  }
  throw ConfigError("unknown encoder kind");
}

EncoderOutput align_and_concat(std::span<const EncoderOutput> outputs) {
  if (outputs.empty()) throw ValidationError("align_and_concat: no encoder outputs");
  int finest = outputs[0].stride;
  int coarsest = outputs[0].stride;
  for (const auto& o : outputs) {
    if (o.stride < 1 || o.data.rows() < 1) throw ValidationError("align_and_concat: empty output");
    finest = std::min(finest, o.stride);
    coarsest = std::max(coarsest, o.stride);
  }
  Index shortest = 0, longest = 0, width = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].stride % finest != 0) {
      throw ValidationError("align_and_concat: stride " + std::to_string(outputs[i].stride) +
                            " is not a multiple of " + std::to_string(finest));
    }
    const Index rows = outputs[i].data.rows() * (outputs[i].stride / finest);
    shortest = i == 0 ? rows : std::min(shortest, rows);
    longest = std::max(longest, rows);
    width += outputs[i].data.cols();
  }
  if ((longest - shortest) * finest > coarsest) {
    throw ValidationError("align_and_concat: lengths differ by " +
                          std::to_string((longest - shortest) * finest) +
                          " frames, more than the largest stride " + std::to_string(coarsest));
  }

  EncoderOutput out;
  out.stride = finest;
  out.data.resize(shortest, width);
  Index col = 0;
  for (const auto& o : outputs) {
    const int repeat = o.stride / finest;
    for (Index r = 0; r < shortest; ++r) {
      out.data.block(r, col, 1, o.data.cols()) = o.data.row(r / repeat);
    }
    col += o.data.cols();
  }
  return out;
}

}  // namespace eslu
