// eslu/nn.cpp

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

#include "eslu/nn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu::nn {

using Eigen::Index;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_shape(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("shape mismatch: " + what);
}

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Gate nonlinearities and state update for one step. `z` holds the 4H
/// pre-activations and is overwritten with the activated gates.
void lstm_gates(Eigen::Ref<Vector> z, const Vector& c_prev, Vector& c, Vector& h) {
  const Index hidden = c_prev.size();
  c.resize(hidden);
  h.resize(hidden);
  for (Index k = 0; k < hidden; ++k) {
    const double i = sigmoid(z[k]);
    const double f = sigmoid(z[hidden + k]);
    const double g = std::tanh(z[2 * hidden + k]);
    const double o = sigmoid(z[3 * hidden + k]);
    z[k] = i;
    z[hidden + k] = f;
    z[2 * hidden + k] = g;
    z[3 * hidden + k] = o;
    c[k] = f * c_prev[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

}  // namespace

Parameter::Parameter(std::string n, Matrix init, bool vec, bool train)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      moment1(Matrix::Zero(value.rows(), value.cols())),
      moment2(Matrix::Zero(value.rows(), value.cols())),
      trainable(train),
      is_vector(vec) {}

void ParameterSet::add(Parameter& p) {
  if (find(p.name)) throw ValidationError("duplicate parameter name " + p.name);
  items_.push_back(&p);
}

void ParameterSet::add_all(const ParameterSet& other) {
  for (Parameter* p : other) add(*p);
}

Parameter* ParameterSet::find(const std::string& name) const {
  for (Parameter* p : items_) {
    if (p->name == name) return p;
  }
  return nullptr;
}

Parameter& ParameterSet::at(const std::string& name) const {
  Parameter* p = find(name);
  if (!p) throw ValidationError("no parameter named " + name);
  return *p;
}

void ParameterSet::zero_grad() const {
  for (Parameter* p : items_) p->zero_grad();
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (Parameter* p : items_) {
    if (p->trainable) sq += p->grad.squaredNorm();
  }
  return std::sqrt(sq);
}

void ParameterSet::scale_grads(double factor) const {
  for (Parameter* p : items_) {
    if (p->trainable) p->grad *= factor;
  }
}

void round_to_float(Matrix& m) { m = m.cast<float>().cast<double>(); }

Matrix uniform_init(Index rows, Index cols, double bound, std::uint64_t seed,
                    const std::string& name) {
  Rng rng(derive_seed(seed, name));
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  round_to_float(m);
  return m;
}

// ---------------------------------------------------------------- linear

Matrix linear(const Matrix& x, const Matrix& weight, const RowVector& bias) {
  check_shape(x.cols() == weight.cols() && bias.size() == weight.rows(),
              "linear x " + dims(x) + ", W " + dims(weight));
  Matrix y = x * weight.transpose();
  y.rowwise() += bias;
  return y;
}

Matrix linear_backward(const Matrix& x, const Matrix& weight, const Matrix& dy, Matrix& dweight,
                       Matrix& dbias) {
  check_shape(dy.rows() == x.rows() && dy.cols() == weight.rows(), "linear dy " + dims(dy));
  dweight.noalias() += dy.transpose() * x;
  dbias += dy.colwise().sum();
  return dy * weight;
}

Linear::Linear(const std::string& name, Index in_dim, Index out_dim, std::uint64_t seed) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  weight = Parameter(name + ".weight", uniform_init(out_dim, in_dim, bound, seed, name + ".weight"));
  bias = Parameter(name + ".bias", uniform_init(1, out_dim, bound, seed, name + ".bias"), true);
}

Matrix Linear::forward(const Matrix& x) const { return linear(x, weight.value, bias.value.row(0)); }

Matrix Linear::backward(const Matrix& x, const Matrix& dy) {
  return linear_backward(x, weight.value, dy, weight.grad, bias.grad);
}

// ---------------------------------------------------------------- LSTM

LstmParams::LstmParams(const std::string& name, Index input_dim, Index hidden, std::uint64_t seed,
                       bool trainable) {
  const double bx = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_input = Parameter(name + ".w_input",
                      uniform_init(4 * hidden, input_dim, bx, seed, name + ".w_input"), false,
                      trainable);
  w_recurrent = Parameter(name + ".w_recurrent",
                          uniform_init(4 * hidden, hidden, bh, seed, name + ".w_recurrent"),
                          false, trainable);
  Matrix b = uniform_init(1, 4 * hidden, bh, seed, name + ".bias");
  b.block(0, hidden, 1, hidden).setOnes();
  bias = Parameter(name + ".bias", std::move(b), true, trainable);
}

LstmState lstm_cell(const Vector& x, const LstmState& prev, const LstmParams& p) {
  const Index hidden = p.hidden();
  check_shape(x.size() == p.input_dim() && prev.h.size() == hidden && prev.c.size() == hidden,
              "lstm_cell");
  Vector z = p.w_input.value * x + p.w_recurrent.value * prev.h + p.bias.value.row(0).transpose();
  LstmState next;
  lstm_gates(z, prev.c, next.c, next.h);
  return next;
}

Matrix lstm_forward(const Matrix& x, const LstmParams& p, bool reverse, LstmCache* cache) {
  const Index steps = x.rows();
  const Index hidden = p.hidden();
  check_shape(x.cols() == p.input_dim(),
              "lstm input " + dims(x) + ", expected width " + std::to_string(p.input_dim()));

  Matrix pre = x * p.w_input.value.transpose();
  pre.rowwise() += p.bias.value.row(0);

  Matrix out(steps, hidden);
  Matrix cells(steps, hidden);
  Vector h = Vector::Zero(hidden);
  Vector c = Vector::Zero(hidden);
  Vector z(4 * hidden);
  Vector c_next, h_next;
  for (Index s = 0; s < steps; ++s) {
    const Index t = reverse ? steps - 1 - s : s;
    z.noalias() = p.w_recurrent.value * h;
    z += pre.row(t).transpose();
    lstm_gates(z, c, c_next, h_next);
    pre.row(t) = z.transpose();  // now the activated gates
    c.swap(c_next);
    h.swap(h_next);
    out.row(t) = h.transpose();
    cells.row(t) = c.transpose();
  }
  if (cache) {
    cache->x = x;
    cache->gates = std::move(pre);
    cache->cells = std::move(cells);
    cache->hidden = out;
    cache->reverse = reverse;
  }
  return out;
}

Matrix lstm_backward(LstmParams& p, const LstmCache& cache, const Matrix& dh) {
  const Index steps = cache.x.rows();
  const Index hidden = p.hidden();
  check_shape(dh.rows() == steps && dh.cols() == hidden, "lstm dh " + dims(dh));

  Matrix dz_all(steps, 4 * hidden);
  Matrix h_prev_all = Matrix::Zero(steps, hidden);
  Vector dh_next = Vector::Zero(hidden);
  Vector dc_next = Vector::Zero(hidden);
  Vector dz(4 * hidden);
  for (Index s = 0; s < steps; ++s) {
    // Walk the recurrence backwards: the last processed step comes first.
    const Index t = cache.reverse ? s : steps - 1 - s;
    const Index prev = cache.reverse ? t + 1 : t - 1;
    const bool has_prev = prev >= 0 && prev < steps;
    if (has_prev) h_prev_all.row(t) = cache.hidden.row(prev);
    for (Index k = 0; k < hidden; ++k) {
      const double i = cache.gates(t, k);
      const double f = cache.gates(t, hidden + k);
      const double g = cache.gates(t, 2 * hidden + k);
      const double o = cache.gates(t, 3 * hidden + k);
      const double tc = std::tanh(cache.cells(t, k));
      const double c_prev = has_prev ? cache.cells(prev, k) : 0.0;
      const double dht = dh(t, k) + dh_next[k];
      const double dc = dht * o * (1.0 - tc * tc) + dc_next[k];
      dz[k] = dc * g * i * (1.0 - i);
      dz[hidden + k] = dc * c_prev * f * (1.0 - f);
      dz[2 * hidden + k] = dc * i * (1.0 - g * g);
      dz[3 * hidden + k] = dht * tc * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    dz_all.row(t) = dz.transpose();
    dh_next.noalias() = p.w_recurrent.value.transpose() * dz;
  }
  p.w_recurrent.grad.noalias() += dz_all.transpose() * h_prev_all;
  p.w_input.grad.noalias() += dz_all.transpose() * cache.x;
  p.bias.grad += dz_all.colwise().sum();
  return dz_all * p.w_input.value;
}

BiLstm::BiLstm(const std::string& name, Index input_dim, Index hidden, int layers,
               std::uint64_t seed) {
  if (layers < 1 || hidden < 1 || input_dim < 1) throw ConfigError("bilstm: invalid dimensions");
  for (int l = 0; l < layers; ++l) {
    const Index in = l == 0 ? input_dim : 2 * hidden;
    const std::string prefix = name + ".l" + std::to_string(l);
    fwd_.emplace_back(prefix + ".fwd", in, hidden, seed);
    bwd_.emplace_back(prefix + ".bwd", in, hidden, seed);
  }
}

Matrix BiLstm::forward(const Matrix& x, Cache* cache) const {
  if (x.rows() < 1) throw ValidationError("bilstm: empty sequence");
  if (cache) {
    cache->fwd.assign(fwd_.size(), {});
    cache->bwd.assign(bwd_.size(), {});
  }
  Matrix input = x;
  for (std::size_t l = 0; l < fwd_.size(); ++l) {
    const Index hidden = fwd_[l].hidden();
    Matrix out(input.rows(), 2 * hidden);
    out.leftCols(hidden) = lstm_forward(input, fwd_[l], false, cache ? &cache->fwd[l] : nullptr);
    out.rightCols(hidden) = lstm_forward(input, bwd_[l], true, cache ? &cache->bwd[l] : nullptr);
    input = std::move(out);
  }
  return input;
}

Matrix BiLstm::backward(const Cache& cache, const Matrix& dy) {
  Matrix d = dy;
  for (std::size_t l = fwd_.size(); l-- > 0;) {
    const Index hidden = fwd_[l].hidden();
    check_shape(d.cols() == 2 * hidden, "bilstm dy " + dims(d));
    Matrix dx = lstm_backward(fwd_[l], cache.fwd[l], d.leftCols(hidden));
    dx += lstm_backward(bwd_[l], cache.bwd[l], d.rightCols(hidden));
    d = std::move(dx);
  }
  return d;
}

void BiLstm::collect(ParameterSet& set) {
  for (std::size_t l = 0; l < fwd_.size(); ++l) {
    fwd_[l].collect(set);
    bwd_[l].collect(set);
  }
}

// ---------------------------------------------------------------- pooling

MaxPoolResult max_pool_time(const Matrix& z) {
  if (z.rows() < 1) throw ValidationError("max_pool_time: empty sequence");
  MaxPoolResult r;
  r.scores.resize(z.cols());
  r.argmax.assign(static_cast<std::size_t>(z.cols()), 0);
  for (Index c = 0; c < z.cols(); ++c) {
    Index best = 0;
    for (Index t = 1; t < z.rows(); ++t) {
      if (z(t, c) > z(best, c)) best = t;
    }
    r.scores[c] = z(best, c);
    r.argmax[static_cast<std::size_t>(c)] = best;
  }
  return r;
}

Matrix max_pool_time_backward(const MaxPoolResult& pooled, const RowVector& dscores, Index rows) {
  Matrix dz = Matrix::Zero(rows, dscores.size());
  for (Index c = 0; c < dscores.size(); ++c) {
    dz(pooled.argmax[static_cast<std::size_t>(c)], c) = dscores[c];
  }
  return dz;
}

AttentionParams::AttentionParams(const std::string& name, Index hidden, Index attn_dim,
                                 std::uint64_t seed) {
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));
  const double ba = 1.0 / std::sqrt(static_cast<double>(attn_dim));
  proj = Parameter(name + ".proj", uniform_init(attn_dim, hidden, bh, seed, name + ".proj"));
  bias = Parameter(name + ".bias", uniform_init(1, attn_dim, bh, seed, name + ".bias"), true);
  query = Parameter(name + ".query", uniform_init(1, attn_dim, ba, seed, name + ".query"), true);
}

AttentionResult attention_pool(const Matrix& h, const AttentionParams& p) {
  if (h.rows() < 1) throw ValidationError("attention_pool: empty sequence");
  check_shape(h.cols() == p.proj.value.cols(), "attention h " + dims(h) + ", W_a " +
                                                   dims(p.proj.value));
  AttentionResult r;
  r.activation = linear(h, p.proj.value, p.bias.value.row(0)).array().tanh();
  const Vector scores = r.activation * p.query.value.row(0).transpose();
  r.weights = softmax(scores.transpose()).transpose();
  r.context = r.weights.transpose() * h;
  return r;
}

Matrix attention_pool_backward(const Matrix& h, AttentionParams& p, const AttentionResult& fwd,
                               const RowVector& dcontext) {
  const Vector& alpha = fwd.weights;
  Matrix dh = alpha * dcontext;
  const Vector dalpha = h * dcontext.transpose();
  const Vector dscores = alpha.cwiseProduct((dalpha.array() - alpha.dot(dalpha)).matrix());
  p.query.grad += dscores.transpose() * fwd.activation;
  Matrix dpre = dscores * p.query.value.row(0);
  dpre.array() *= 1.0 - fwd.activation.array().square();
  dh += linear_backward(h, p.proj.value, dpre, p.proj.grad, p.bias.grad);
  return dh;
}

// ---------------------------------------------------------------- loss

RowVector softmax(const RowVector& logits) {
  const double m = logits.maxCoeff();
  RowVector e = (logits.array() - m).exp();
  return e / e.sum();
}

LossResult softmax_cross_entropy(const RowVector& logits, int label) {
  if (logits.size() < 2) throw ValidationError("softmax_cross_entropy: need >= 2 classes");
  if (label < 0 || label >= logits.size()) {
    throw ValidationError("softmax_cross_entropy: label " + std::to_string(label) +
                          " out of range");
  }
  const double m = logits.maxCoeff();
  const double log_sum = std::log((logits.array() - m).exp().sum());
  LossResult r;
  r.loss = -(logits[label] - m - log_sum);
  r.grad = softmax(logits);
  r.grad[label] -= 1.0;
  return r;
}

// ---------------------------------------------------------------- optimizers

void Optimizer::step(const ParameterSet& params) {
  for (Parameter* p : params) {
    if (p->trainable && !p->grad.allFinite()) {
      throw NumericError("non-finite gradient in " + p->name + " at step " +
                         std::to_string(steps_ + 1));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  for (Parameter* p : params) {
    if (!p->trainable) {
      p->zero_grad();
      continue;
    }
    if (cfg_.kind == OptimizerConfig::Kind::kSgd) {
      if (cfg_.momentum > 0.0) {
        p->moment1 = cfg_.momentum * p->moment1 + p->grad;
        round_to_float(p->moment1);
        p->value -= cfg_.lr * p->moment1;
      } else {
        p->value -= cfg_.lr * p->grad;
      }
    } else {
      p->moment1 = cfg_.beta1 * p->moment1 + (1.0 - cfg_.beta1) * p->grad;
      p->moment2 = cfg_.beta2 * p->moment2 + (1.0 - cfg_.beta2) * p->grad.cwiseAbs2();
      round_to_float(p->moment1);
      round_to_float(p->moment2);
      const double c1 = 1.0 - std::pow(cfg_.beta1, t);
      const double c2 = 1.0 - std::pow(cfg_.beta2, t);
      p->value.array() -= cfg_.lr * (p->moment1.array() / c1) /
                          ((p->moment2.array() / c2).sqrt() + cfg_.eps);
    }
    round_to_float(p->value);
    p->zero_grad();
  }
}

// ---------------------------------------------------------------- checking

GradcheckReport finite_diff_gradcheck(const std::function<double(bool)>& loss_fn,
                                      const ParameterSet& params, double eps) {
  params.zero_grad();
  loss_fn(true);
  std::vector<Matrix> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);

  GradcheckReport report;
  std::size_t idx = 0;
  for (Parameter* p : params) {
    double worst = 0.0;
    for (Index r = 0; r < p->value.rows(); ++r) {
      for (Index c = 0; c < p->value.cols(); ++c) {
        const double orig = p->value(r, c);
        p->value(r, c) = orig + eps;
        const double up = loss_fn(false);
        p->value(r, c) = orig - eps;
        const double down = loss_fn(false);
        p->value(r, c) = orig;
        const double fd = (up - down) / (2.0 * eps);
        const double a = analytic[idx](r, c);
        const double err = std::abs(a - fd) / std::max(1e-8, std::abs(a) + std::abs(fd));
        worst = std::max(worst, err);
      }
    }
    report.per_parameter.emplace_back(p->name, worst);
    if (worst >= report.max_rel_error) {
      report.max_rel_error = worst;
      report.worst_parameter = p->name;
    }
    ++idx;
  }
  params.zero_grad();
  return report;
}

// ---------------------------------------------------------------- io

namespace {

NamedTensor tensor_of(const std::string& name, const Matrix& m, bool is_vector) {
  NamedTensor t;
  t.name = name;
  if (is_vector) {
    t.shape = {static_cast<std::uint32_t>(m.size())};
  } else {
    t.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  }
  t.data.resize(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      t.data[static_cast<std::size_t>(r * m.cols() + c)] = static_cast<float>(m(r, c));
    }
  }
  return t;
}

void fill_from(Matrix& m, const NamedTensor& t, bool is_vector) {
  const bool shape_ok =
      is_vector ? (t.shape.size() == 1 && t.shape[0] == m.size())
                : (t.shape.size() == 2 && t.shape[0] == m.rows() && t.shape[1] == m.cols());
  if (!shape_ok) throw ValidationError("checkpoint tensor " + t.name + " has the wrong shape");
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = t.data[static_cast<std::size_t>(r * m.cols() + c)];
    }
  }
}

}  // namespace

std::vector<NamedTensor> to_tensors(const ParameterSet& params, bool with_optimizer_state) {
  std::vector<NamedTensor> out;
  for (Parameter* p : params) out.push_back(tensor_of(p->name, p->value, p->is_vector));
  if (with_optimizer_state) {
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      out.push_back(tensor_of("opt.m." + p->name, p->moment1, p->is_vector));
      out.push_back(tensor_of("opt.v." + p->name, p->moment2, p->is_vector));
    }
  }
  return out;
}

void load_tensors(const ParameterSet& params, const std::vector<NamedTensor>& tensors) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t;
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw ValidationError("checkpoint lacks tensor " + p->name);
    fill_from(p->value, *it->second, p->is_vector);
    p->moment1.setZero();
    p->moment2.setZero();
    if (auto m = by_name.find("opt.m." + p->name); m != by_name.end()) {
      fill_from(p->moment1, *m->second, p->is_vector);
    }
    if (auto v = by_name.find("opt.v." + p->name); v != by_name.end()) {
      fill_from(p->moment2, *v->second, p->is_vector);
    }
    p->zero_grad();
  }
}

}  // namespace eslu::nn
