// eslu/tests/unit/test_model.cpp

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

#include <fstream>
#include <limits>
#include <numeric>

#include "eslu/error.hpp"
#include "eslu/model.hpp"
#include "eslu/rng.hpp"
#include "eslu/synth.hpp"
#include "experiment.hpp"
#include "scratch.hpp"

namespace eslu {
namespace {

using testing::projection_encoder;
using testing::reduced_model;

SluConfig tiny(PoolingHead head, int hidden = 4) {
  return reduced_model({projection_encoder("A", 8, 1, 2), projection_encoder("B", 8, 2, 4, 14, 12)},
                       head, hidden);
}

// Short easy-preset clips with raw filterbank features.
std::vector<TrainingExample> clips(int n, double seconds, std::uint64_t seed) {
  SynthSpec spec = SynthSpec::easy();
  spec.clip_seconds = seconds;
  spec.event_duration_s = {0.25 * seconds, 0.5 * seconds};
  std::vector<TrainingExample> out;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const SynthClip c = generate_clip(derive_seed(seed, "model-test", i), label, spec);
    out.push_back({"utt" + std::to_string(i), fbank(c.wave), label});
  }
  return out;
}

TrainConfig quick_train(int epochs, std::uint64_t seed = 3) {
  TrainConfig t;
  t.epochs = epochs;
  t.seed = seed;
  return t;
}

TEST(SluModel, ReferenceShapeChain) {
  const SluModel model(SluConfig::reference(), 0);
  const SynthClip clip = generate_clip(1, 1, SynthSpec::easy());
  const FeatureMatrix f = model.features(clip.wave);
  EXPECT_EQ(f.rows(), 1498);
  EXPECT_EQ(f.dim(), 80);
  const EncoderOutput enc = model.encode(f, "x");
  EXPECT_EQ(enc.data.rows(), 1498);
  EXPECT_EQ(enc.data.cols(), 1280);
  const ForwardPass fwd = model.forward_encoded(enc);
  EXPECT_EQ(fwd.lstm_out.rows(), 1498);
  EXPECT_EQ(fwd.lstm_out.cols(), 512);
  EXPECT_EQ(fwd.frame_logits.rows(), 1498);
  EXPECT_EQ(fwd.frame_logits.cols(), 2);
  EXPECT_EQ(fwd.scores.size(), 2);
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(fwd.scores(c), fwd.frame_logits.col(c).maxCoeff());
  }
}

TEST(SluModel, ForwardIsDeterministic) {
  const SluModel model(tiny(PoolingHead::kMaxPool), 5);
  const Waveform w = generate_clip(9, 1, [] {
    SynthSpec s;
    s.clip_seconds = 2.0;
    return s;
  }()).wave;
  EXPECT_EQ(model.forward(w), model.forward(w));
}

TEST(SluModel, MaxPoolInvariantToRowPermutation) {
  const SluModel model(tiny(PoolingHead::kMaxPool, 6), 5);
  const auto data = clips(1, 2.0, 2);
  const ForwardPass fwd = model.forward_features(data[0].features, "");
  Rng rng(4);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(fwd.frame_logits.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<Eigen::Index>(perm));
  Matrix shuffled(fwd.frame_logits.rows(), fwd.frame_logits.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled.row(static_cast<Eigen::Index>(i)) = fwd.frame_logits.row(perm[i]);
  EXPECT_EQ(nn::max_pool_time(shuffled).scores, fwd.scores);
}

TEST(SluModel, EndToEndGradcheckBothHeads) {
  const auto data = clips(2, 2.0, 3);
  for (PoolingHead head : {PoolingHead::kMaxPool, PoolingHead::kAttention}) {
    SluModel model(tiny(head), 7);
    for (const auto& ex : data) {
      const EncoderOutput enc = model.encode(ex.features, ex.utt_id);
      const nn::ParameterSet params = model.trainable_parameters();
      auto loss = [&](bool grad) { return example_loss(model, enc, ex.label, grad); };
      const nn::GradcheckReport r = nn::finite_diff_gradcheck(loss, params, 1e-5);
      EXPECT_LT(r.max_rel_error, 1e-4) << to_string(head) << " worst " << r.worst_parameter;
    }
  }
}

TEST(Trainer, MemorizesTenClips) {
  const auto data = clips(10, 2.0, 4);
  SluConfig cfg = reduced_model({projection_encoder("A", 32, 1, 4), projection_encoder("B", 8, 2, 4, 14, 12)},
                                PoolingHead::kMaxPool, 32);
  SluModel model(cfg, 1);
  TrainConfig t = quick_train(20);
  t.lr = 1e-2;
  const auto history = Trainer(model, t).run(data);
  ASSERT_EQ(history.size(), 20u);
  EXPECT_EQ(model.step(), 200u);
  EXPECT_LT(history.back().mean_loss, 0.05);
  const EvaluationResult ev = evaluate(model, data);
  EXPECT_EQ(ev.report.f1, 1.0);
}

TEST(Trainer, SeededRunsGiveIdenticalCheckpoints) {
  const auto data = clips(6, 1.0, 5);
  std::string bytes[2];
  std::string encoders_before;
  for (auto& b : bytes) {
    SluModel model(tiny(PoolingHead::kAttention, 6), 3);
    model.train_config = quick_train(2);
    Trainer(model, *model.train_config).run(data);
    b = model.checkpoint_bytes();
  }
  EXPECT_EQ(bytes[0], bytes[1]);
}

TEST(Trainer, FrozenEncodersStayBitIdentical) {
  const auto data = clips(6, 1.0, 6);
  SluModel model(tiny(PoolingHead::kMaxPool, 6), 3);
  auto encoder_values = [&] {
    std::vector<Matrix> v;
    for (const nn::Parameter* p : model.all_parameters()) {
      if (p->name.rfind("encoder.", 0) == 0) v.push_back(p->value);
    }
    return v;
  };
  const auto before = encoder_values();
  ASSERT_EQ(before.size(), 4u);
  Trainer(model, quick_train(2)).run(data);
  EXPECT_EQ(encoder_values(), before);
  for (const nn::Parameter* p : model.trainable_parameters()) {
    EXPECT_NE(p->name.rfind("encoder.", 0), 0u) << p->name;
  }
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  const auto data = clips(6, 1.0, 7);
  testing::ScratchDir dir("model");
  const TrainConfig full = quick_train(3);

  SluModel straight(tiny(PoolingHead::kMaxPool, 6), 2);
  straight.train_config = full;
  Trainer(straight, full).run(data);

  SluModel first(tiny(PoolingHead::kMaxPool, 6), 2);
  first.train_config = full;
  TrainConfig partial = full;
  partial.max_steps = 8;  // stops inside the second epoch
  Trainer(first, partial).run(data);
  EXPECT_EQ(first.step(), 8u);
  first.save(dir / "mid.ckpt");

  auto resumed = SluModel::load(dir / "mid.ckpt");
  EXPECT_EQ(resumed->step(), 8u);
  Trainer(*resumed, full).run(data);
  EXPECT_EQ(resumed->step(), 18u);
  EXPECT_EQ(resumed->checkpoint_bytes(), straight.checkpoint_bytes());
}

TEST(Checkpoint, SaveLoadIsBitwise) {
  const auto data = clips(4, 1.0, 8);
  testing::ScratchDir dir("model");
  for (PoolingHead head : {PoolingHead::kMaxPool, PoolingHead::kAttention}) {
    SluModel model(tiny(head, 5), 4);
    Trainer(model, quick_train(1)).run(data);
    model.save(dir / "m.ckpt");
    const auto loaded = SluModel::load(dir / "m.ckpt");
    EXPECT_EQ(loaded->step(), model.step());
    for (const auto& ex : data) {
      const RowVector a = model.forward_features(ex.features, ex.utt_id).scores;
      const RowVector b = loaded->forward_features(ex.features, ex.utt_id).scores;
      EXPECT_EQ(a, b);
    }
    EXPECT_EQ(loaded->checkpoint_bytes(), model.checkpoint_bytes());
  }
  std::ofstream(dir / "junk.ckpt") << "FCKP1";
  EXPECT_THROW(SluModel::load(dir / "junk.ckpt"), ValidationError);
  EXPECT_THROW(SluModel::load(dir / "none.ckpt"), IoError);
}

TEST(Trainer, RejectsMissingClass) {
  auto data = clips(4, 1.0, 9);
  for (auto& ex : data) ex.label = 0;
  SluModel model(tiny(PoolingHead::kMaxPool), 1);
  EXPECT_THROW(Trainer(model, quick_train(1)).run(data), ValidationError);
  EXPECT_THROW(Trainer(model, quick_train(1)).run({}), ValidationError);
}

TEST(Trainer, NonFiniteLossNamesStep) {
  auto data = clips(2, 1.0, 10);
  data[0].features.data(3, 3) = std::numeric_limits<double>::quiet_NaN();
  data[1].features.data(3, 3) = std::numeric_limits<double>::quiet_NaN();
  SluModel model(tiny(PoolingHead::kMaxPool), 1);
  try {
    Trainer(model, quick_train(1)).run(data);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST(Evaluate, PerfectAndConstantPredictors) {
  const auto data = clips(6, 1.0, 11);
  const SluModel model(tiny(PoolingHead::kMaxPool), 1);
  const EvaluationResult ev = evaluate(model, data);
  EXPECT_EQ(ev.counts.total(), data.size());

  // Output bias decides everything once the weights are zero.
  SluModel constant(tiny(PoolingHead::kMaxPool), 1);
  nn::ParameterSet ps = constant.trainable_parameters();
  ps.at("output.weight").value.setZero();
  ps.at("output.bias").value << 1.0, -1.0;
  const EvaluationResult neg = evaluate(constant, data);
  EXPECT_EQ(neg.counts.n_tp, 0u);
  EXPECT_EQ(neg.report.recall, 0.0);
  EXPECT_EQ(neg.counts.total(), data.size());

  // A "perfect" model: score by label through the output bias per example.
  ConfusionCounts perfect;
  for (const auto& ex : data) perfect = accumulate(perfect, ex.label, ex.label);
  EXPECT_EQ(report(perfect).f1, 1.0);
}

TEST(Predict, EventTime) {
  const SluModel model(tiny(PoolingHead::kMaxPool), 1);
  EncoderOutput one;
  one.data = Matrix::Constant(1, 16, 0.1);
  one.stride = 2;
  const Prediction p = predict_encoded(model, one, 10.0);
  ASSERT_TRUE(p.event_time_s.has_value());
  EXPECT_EQ(*p.event_time_s, 0.0);

  const auto data = clips(2, 2.0, 12);
  const EncoderOutput enc = model.encode(data[1].features, "");
  const Prediction q = predict_encoded(model, enc, 10.0);
  EXPECT_GE(*q.event_time_s, 0.0);
  EXPECT_LE(*q.event_time_s, 2.0);
  EXPECT_EQ(*q.event_time_s, q.event_row * enc.stride * 0.01);

  const SluModel attn(tiny(PoolingHead::kAttention), 1);
  EXPECT_FALSE(predict_encoded(attn, enc, 10.0).event_time_s.has_value());
}

TEST(SluConfig, Validation) {
  SluConfig c = tiny(PoolingHead::kMaxPool);
  c.hidden = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny(PoolingHead::kMaxPool);
  c.encoders[1].id = "A";
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(pooling_head_from_string("attention"), PoolingHead::kAttention);
  EXPECT_THROW(pooling_head_from_string("mean"), ConfigError);
  TrainConfig t;
  t.lr = 0;
  EXPECT_THROW(t.validate(), ConfigError);
}

}  // namespace
}  // namespace eslu
