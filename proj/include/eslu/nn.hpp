// eslu/nn.hpp

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

// Dense layers with hand-derived backward passes. There is no autodiff graph:
// every forward that training needs has a matching *_backward that
// accumulates parameter gradients and returns the input gradient. All of them
// are validated by finite_diff_gradcheck.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eslu/archive.hpp"
#include "eslu/matrix.hpp"

namespace eslu::nn {

/// A trainable (or frozen) tensor with its gradient and optimizer slots.
/// Vectors are stored as 1 x n and serialize as rank 1.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix moment1;  // Adam first moment / SGD velocity
  Matrix moment2;  // Adam second moment
  bool trainable = true;
  bool is_vector = false;

  Parameter() = default;
  Parameter(std::string name, Matrix init, bool is_vector = false, bool trainable = true);

  void zero_grad() { grad.setZero(); }
};

/// Non-owning, ordered registry of the parameters of a model. Names are
/// unique.
class ParameterSet {
 public:
  void add(Parameter& p);
  void add_all(const ParameterSet& other);

  Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name) const;

  std::vector<Parameter*>::const_iterator begin() const { return items_.begin(); }
  std::vector<Parameter*>::const_iterator end() const { return items_.end(); }
  std::size_t size() const { return items_.size(); }

  void zero_grad() const;
  /// L2 norm over the gradients of trainable parameters.
  double grad_norm() const;
  void scale_grads(double factor) const;

 private:
  std::vector<Parameter*> items_;
};

/// Rounds every entry to the nearest float.
void round_to_float(Matrix& m);

/// uniform(-bound, bound) entries from a seed derived from (seed, name),
/// rounded to float.
Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, std::uint64_t seed,
                    const std::string& name);

// ---------------------------------------------------------------- linear

/// y = x W^T + b, x: T x D, W: C x D, b: 1 x C.
Matrix linear(const Matrix& x, const Matrix& weight, const RowVector& bias);

/// Accumulates dW, db and returns dx for upstream dy (T x C).
Matrix linear_backward(const Matrix& x, const Matrix& weight, const Matrix& dy, Matrix& dweight,
                       Matrix& dbias);

struct Linear {
  Parameter weight;
  Parameter bias;

  Linear() = default;
  Linear(const std::string& name, Eigen::Index in_dim, Eigen::Index out_dim, std::uint64_t seed);

  Matrix forward(const Matrix& x) const;
  Matrix backward(const Matrix& x, const Matrix& dy);
  void collect(ParameterSet& set) { set.add(weight); set.add(bias); }
};

// ---------------------------------------------------------------- LSTM

/// Gate blocks of the stacked weights are ordered (input, forget,
/// cell candidate, output), each H rows.
struct LstmParams {
  Parameter w_input;      // 4H x D
  Parameter w_recurrent;  // 4H x H
  Parameter bias;         // 1 x 4H

  LstmParams() = default;
  /// uniform(+-1/sqrt(H)) weights, forget-gate bias 1.0.
  LstmParams(const std::string& name, Eigen::Index input_dim, Eigen::Index hidden,
             std::uint64_t seed, bool trainable = true);

  Eigen::Index input_dim() const { return w_input.value.cols(); }
  Eigen::Index hidden() const { return w_recurrent.value.cols(); }
  void collect(ParameterSet& set) {
    set.add(w_input);
    set.add(w_recurrent);
    set.add(bias);
  }
};

struct LstmState {
  Vector h;
  Vector c;
};

/// One step: gates from W_x x + W_h h_prev + b; c = f*c_prev + i*g;
/// h = o*tanh(c).
LstmState lstm_cell(const Vector& x, const LstmState& prev, const LstmParams& p);

/// Activations kept for backpropagation through time. Rows are indexed by
/// original time; `reverse` runs the recurrence from t = T-1 down to 0.
struct LstmCache {
  Matrix x;
  Matrix gates;   // T x 4H, post-activation
  Matrix cells;   // T x H
  Matrix hidden;  // T x H
  bool reverse = false;
};

/// Runs the recurrence from zero state; output row t is the hidden state
/// produced after consuming x_t.
Matrix lstm_forward(const Matrix& x, const LstmParams& p, bool reverse, LstmCache* cache);

/// Accumulates parameter gradients, returns dx.
Matrix lstm_backward(LstmParams& p, const LstmCache& cache, const Matrix& dh);

/// Stacked bidirectional LSTM. Each layer concatenates [h_fwd_t | h_bwd_t];
/// deeper layers consume the 2H-wide output of the layer below.
class BiLstm {
 public:
  struct Cache {
    std::vector<LstmCache> fwd;
    std::vector<LstmCache> bwd;
  };

  BiLstm() = default;
  BiLstm(const std::string& name, Eigen::Index input_dim, Eigen::Index hidden, int layers,
         std::uint64_t seed);

  Matrix forward(const Matrix& x, Cache* cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);

  int layers() const { return static_cast<int>(fwd_.size()); }
  Eigen::Index hidden() const { return fwd_.empty() ? 0 : fwd_[0].hidden(); }
  LstmParams& forward_params(int layer) { return fwd_.at(layer); }
  LstmParams& backward_params(int layer) { return bwd_.at(layer); }
  void collect(ParameterSet& set);

 private:
  std::vector<LstmParams> fwd_;
  std::vector<LstmParams> bwd_;
};

// ---------------------------------------------------------------- pooling

struct MaxPoolResult {
  RowVector scores;                  // 1 x C
  std::vector<Eigen::Index> argmax;  // winning row per class, smallest on ties
};

MaxPoolResult max_pool_time(const Matrix& z);

/// Routes dscores to the argmax rows only.
Matrix max_pool_time_backward(const MaxPoolResult& pooled, const RowVector& dscores,
                              Eigen::Index rows);

/// Additive single-query attention: e_t = v . tanh(W_a h_t + b_a).
struct AttentionParams {
  Parameter proj;   // A x H
  Parameter bias;   // 1 x A
  Parameter query;  // 1 x A

  AttentionParams() = default;
  AttentionParams(const std::string& name, Eigen::Index hidden, Eigen::Index attn_dim,
                  std::uint64_t seed);
  void collect(ParameterSet& set) {
    set.add(proj);
    set.add(bias);
    set.add(query);
  }
};

struct AttentionResult {
  RowVector context;  // 1 x H
  Vector weights;     // T, sums to 1
  Matrix activation;  // T x A, tanh(W_a h_t + b_a)
};

AttentionResult attention_pool(const Matrix& h, const AttentionParams& p);

/// Accumulates attention parameter gradients, returns dh.
Matrix attention_pool_backward(const Matrix& h, AttentionParams& p, const AttentionResult& fwd,
                               const RowVector& dcontext);

// ---------------------------------------------------------------- loss

RowVector softmax(const RowVector& logits);

struct LossResult {
  double loss = 0.0;
  RowVector grad;  // d loss / d logits
};

LossResult softmax_cross_entropy(const RowVector& logits, int label);

// ---------------------------------------------------------------- optimizers

struct OptimizerConfig {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Applies one update to every trainable parameter, then zeroes gradients.
/// Parameters and optimizer slots are kept on the float grid so checkpoints
/// (f32) reproduce them exactly. Throws NumericError naming the tensor when
/// a gradient is not finite.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  void step(const ParameterSet& params);

  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::uint64_t steps_ = 0;
};

// ---------------------------------------------------------------- checking

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::vector<std::pair<std::string, double>> per_parameter;
};

/// Compares analytic gradients with central differences.
///
/// loss_fn(true) must compute the loss and accumulate analytic gradients
/// into the parameters' grad buffers (zeroed beforehand); loss_fn(false)
/// only evaluates the loss. Per entry the error is
/// |analytic - fd| / max(1e-8, |analytic| + |fd|).
GradcheckReport finite_diff_gradcheck(const std::function<double(bool)>& loss_fn,
                                      const ParameterSet& params, double eps = 1e-4);

// ---------------------------------------------------------------- io

/// Parameters (and, optionally, their optimizer slots as "opt.m.<name>" /
/// "opt.v.<name>") as FCKP1 records.
std::vector<NamedTensor> to_tensors(const ParameterSet& params, bool with_optimizer_state);

/// Loads values (and optimizer slots when present). Every parameter must be
/// present with a matching shape.
void load_tensors(const ParameterSet& params, const std::vector<NamedTensor>& tensors);

}  // namespace eslu::nn
