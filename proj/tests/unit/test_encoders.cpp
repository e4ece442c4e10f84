// eslu/tests/unit/test_encoders.cpp

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

#include "eslu/archive.hpp"
#include "eslu/encoders.hpp"
#include "eslu/error.hpp"
#include "eslu/rng.hpp"
#include "scratch.hpp"

namespace eslu {
namespace {

FeatureMatrix random_features(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix f;
  f.data.resize(rows, cols);
  for (Eigen::Index i = 0; i < f.data.size(); ++i) f.data.data()[i] = rng.normal();
  return f;
}

EncoderOutput rows_of(int rows, int cols, int stride, double base) {
  EncoderOutput o;
  o.stride = stride;
  o.data.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) o.data(r, c) = base + 10 * r + c;
  }
  return o;
}

EncoderSpec spec(const std::string& id, int dim, int stride, std::uint64_t seed = 1) {
  EncoderSpec s;
  s.id = id;
  s.output_dim = dim;
  s.frame_stride = stride;
  s.init_seed = seed;
  return s;
}

TEST(FrozenProjection, IdentityWeightsGiveTanhOfPaddedInput) {
  const int f = 3, d = 5;
  Matrix w = Matrix::Zero(d, f);
  w.topLeftCorner(f, f).setIdentity();
  FrozenProjectionEncoder enc(spec("A", d, 1), w, RowVector::Zero(d));
  const FeatureMatrix x = random_features(6, f, 2);
  const EncoderOutput y = enc.encode(x, "");
  ASSERT_EQ(y.data.rows(), 6);
  ASSERT_EQ(y.data.cols(), d);
  for (int t = 0; t < 6; ++t) {
    for (int c = 0; c < d; ++c) {
      EXPECT_EQ(y.data(t, c), c < f ? std::tanh(x.data(t, c)) : 0.0);
    }
  }
}

TEST(FrozenProjection, StridedRowsAndStacking) {
  EXPECT_EQ(strided_rows(98, 4), 25);
  const auto enc = make_encoder(spec("A", 7, 4), 80);
  const EncoderOutput y = enc->encode(random_features(98, 80, 3), "");
  EXPECT_EQ(y.data.rows(), 25);
  EXPECT_EQ(y.data.cols(), 7);
  EXPECT_EQ(y.stride, 4);
  EXPECT_LE(y.data.cwiseAbs().maxCoeff(), 1.0);

  // Stride 2 stacking: row r sees frames 2r and 2r+1, zero padded at the end.
  Matrix w = Matrix::Zero(4, 4);
  w.setIdentity();
  FrozenProjectionEncoder two(spec("S", 4, 2), w, RowVector::Zero(4));
  const FeatureMatrix x = random_features(3, 2, 4);
  const EncoderOutput z = two.encode(x, "");
  ASSERT_EQ(z.data.rows(), 2);
  EXPECT_EQ(z.data(0, 2), std::tanh(x.data(1, 0)));
  EXPECT_EQ(z.data(1, 0), std::tanh(x.data(2, 0)));
  EXPECT_EQ(z.data(1, 3), 0.0);
}

TEST(FrozenProjection, DeterministicAndSeeded) {
  const FeatureMatrix x = random_features(20, 10, 5);
  const auto a = make_encoder(spec("A", 6, 2, 9), 10);
  const auto b = make_encoder(spec("A", 6, 2, 9), 10);
  const auto c = make_encoder(spec("A", 6, 2, 10), 10);
  EXPECT_EQ(a->encode(x, "").data, b->encode(x, "").data);
  EXPECT_NE(a->encode(x, "").data, c->encode(x, "").data);
}

TEST(FrozenProjection, BandSelection) {
  EncoderSpec s = spec("B", 4, 1);
  s.band_first = 2;
  s.band_count = 3;
  const auto enc = make_encoder(s, 10);
  FeatureMatrix x = random_features(5, 10, 6);
  const Matrix before = enc->encode(x, "").data;
  x.data.col(0).setConstant(100.0);  // outside the band
  x.data.col(9).setConstant(-4.0);
  EXPECT_EQ(enc->encode(x, "").data, before);
  x.data.col(3).setConstant(1.0);
  EXPECT_NE(enc->encode(x, "").data, before);
  s.band_first = 8;
  EXPECT_THROW(make_encoder(s, 10), ConfigError);
}

TEST(FrozenRecurrent, EmitsEveryStrideRow) {
  const FeatureMatrix x = random_features(10, 4, 7);
  const auto one = make_encoder([] {
    EncoderSpec s = spec("R", 3, 1, 5);
    s.kind = EncoderKind::kFrozenRecurrent;
    return s;
  }(), 4);
  const auto three = make_encoder([] {
    EncoderSpec s = spec("R", 3, 3, 5);
    s.kind = EncoderKind::kFrozenRecurrent;
    return s;
  }(), 4);
  const Matrix full = one->encode(x, "").data;
  const EncoderOutput sub = three->encode(x, "");
  ASSERT_EQ(sub.data.rows(), 4);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(sub.data.row(r), full.row(3 * r));
}

TEST(Precomputed, LoadsVerbatim) {
  testing::ScratchDir dir("encoders");
  FeatureMatrix m = random_features(6, 5, 8);
  for (Eigen::Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = static_cast<float>(m.data.data()[i]);
  const std::vector<NamedFeatures> items{{"u1", m}};
  write_feature_archive(items, dir / "p.fark", dir / "p.scp");
  EncoderSpec s = spec("P", 5, 4);
  s.kind = EncoderKind::kPrecomputed;
  s.feature_scp = (dir / "p.scp").string();
  const auto enc = make_encoder(s, 80);
  const EncoderOutput y = enc->encode(FeatureMatrix{}, "u1");
  EXPECT_EQ(y.data, m.data);
  EXPECT_EQ(y.stride, 4);
  EXPECT_THROW(enc->encode(FeatureMatrix{}, "u2"), ValidationError);
  s.output_dim = 6;
  EXPECT_THROW(make_encoder(s, 80)->encode(FeatureMatrix{}, "u1"), ValidationError);
}

TEST(AlignAndConcat, EqualStride) {
  const EncoderOutput a = rows_of(3, 4, 1, 0), b = rows_of(3, 2, 1, 1000);
  const EncoderOutput y = align_and_concat(a, b);
  ASSERT_EQ(y.data.rows(), 3);
  ASSERT_EQ(y.data.cols(), 6);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(y.data.row(t).leftCols(4), a.data.row(t));
    EXPECT_EQ(y.data.row(t).rightCols(2), b.data.row(t));
  }
}

TEST(AlignAndConcat, RepeatsCoarseRows) {
  const EncoderOutput a = rows_of(8, 3, 1, 0), b = rows_of(2, 2, 4, 1000);
  const EncoderOutput y = align_and_concat(a, b);
  ASSERT_EQ(y.data.rows(), 8);
  ASSERT_EQ(y.data.cols(), 5);
  EXPECT_EQ(y.stride, 1);
  for (int t = 0; t < 8; ++t) EXPECT_EQ(y.data.row(t).rightCols(2), b.data.row(t / 4));
}

TEST(AlignAndConcat, ToleranceBoundary) {
  const EncoderOutput b = rows_of(1, 2, 4, 1000);
  const EncoderOutput y = align_and_concat(rows_of(8, 3, 1, 0), b);
  EXPECT_EQ(y.data.rows(), 4);
  EXPECT_THROW(align_and_concat(rows_of(9, 3, 1, 0), b), ValidationError);
  EXPECT_THROW(align_and_concat(rows_of(4, 3, 2, 0), rows_of(2, 3, 3, 0)), ValidationError);
}

TEST(AlignAndConcat, WidthAndSymmetry) {
  const EncoderOutput a = rows_of(12, 5, 1, 0), b = rows_of(3, 3, 4, 500), c = rows_of(6, 2, 2, 900);
  const EncoderOutput parts[] = {a, b, c};
  const EncoderOutput all = align_and_concat(parts);
  EXPECT_EQ(all.data.cols(), 10);
  const EncoderOutput ab = align_and_concat(a, b), ba = align_and_concat(b, a);
  ASSERT_EQ(ab.data.rows(), ba.data.rows());
  EXPECT_EQ(ab.data.leftCols(5), ba.data.rightCols(5));
  EXPECT_EQ(ab.data.rightCols(3), ba.data.leftCols(3));
}

TEST(EncoderSpec, Validation) {
  EXPECT_THROW(spec("A", 0, 1).validate(), ConfigError);
  EXPECT_THROW(spec("A", 4, 0).validate(), ConfigError);
  EXPECT_THROW(spec("a.b", 4, 1).validate(), ConfigError);
  EncoderSpec p = spec("P", 4, 1);
  p.kind = EncoderKind::kPrecomputed;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_EQ(encoder_kind_from_string(to_string(EncoderKind::kFrozenRecurrent)),
            EncoderKind::kFrozenRecurrent);
  EXPECT_THROW(encoder_kind_from_string("conformer"), ConfigError);
}

TEST(Encoders, FrozenParametersAreNotTrainable) {
  const auto enc = make_encoder(spec("A", 4, 1), 6);
  nn::ParameterSet set;
  enc->collect(set);
  EXPECT_EQ(set.size(), 2u);
  for (const nn::Parameter* p : set) EXPECT_FALSE(p->trainable) << p->name;
}

}  // namespace
}  // namespace eslu
