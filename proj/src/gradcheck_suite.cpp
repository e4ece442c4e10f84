// eslu/gradcheck_suite.cpp

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

#include "eslu/gradcheck_suite.hpp"

#include <algorithm>

#include "eslu/nn.hpp"
#include "eslu/rng.hpp"

namespace eslu {

namespace {

using Eigen::Index;

Matrix normal_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

Index dim(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

LayerCheck finish(const std::string& layer, const nn::GradcheckReport& r) {
  return {layer, r.max_rel_error, r.worst_parameter};
}

// The scalar loss used throughout is sum(R .* y) for a fixed random R, so
// that dL/dy = R exercises every output entry with a distinct weight.

LayerCheck check_linear(Rng& rng) {
  const Index t = dim(rng, 1, 7), d = dim(rng, 1, 5), c = dim(rng, 1, 5);
  nn::Linear lin("linear", d, c, rng.next_u64());
  nn::Parameter x("input", normal_matrix(rng, t, d));
  const Matrix weights = normal_matrix(rng, t, c);
  nn::ParameterSet set;
  lin.collect(set);
  set.add(x);
  auto loss = [&](bool grad) {
    const Matrix y = lin.forward(x.value);
    if (grad) x.grad += lin.backward(x.value, weights);
    return y.cwiseProduct(weights).sum();
  };
  return finish("linear", nn::finite_diff_gradcheck(loss, set));
}

LayerCheck check_lstm_cell(Rng& rng) {
  const Index t = 3, d = dim(rng, 1, 5), h = dim(rng, 1, 5);
  nn::LstmParams p("lstm", d, h, rng.next_u64());
  nn::Parameter x("input", normal_matrix(rng, t, d));
  const Matrix weights = normal_matrix(rng, t, h);
  const bool reverse = rng.below(2) == 1;
  nn::ParameterSet set;
  p.collect(set);
  set.add(x);
  auto loss = [&](bool grad) {
    nn::LstmCache cache;
    const Matrix y = nn::lstm_forward(x.value, p, reverse, grad ? &cache : nullptr);
    if (grad) x.grad += nn::lstm_backward(p, cache, weights);
    return y.cwiseProduct(weights).sum();
  };
  return finish("lstm_cell", nn::finite_diff_gradcheck(loss, set));
}

LayerCheck check_bilstm(Rng& rng) {
  const Index t = dim(rng, 1, 7), d = dim(rng, 1, 5), h = dim(rng, 1, 5);
  nn::BiLstm lstm("bilstm", d, h, 2, rng.next_u64());
  nn::Parameter x("input", normal_matrix(rng, t, d));
  const Matrix weights = normal_matrix(rng, t, 2 * h);
  nn::ParameterSet set;
  lstm.collect(set);
  set.add(x);
  auto loss = [&](bool grad) {
    nn::BiLstm::Cache cache;
    const Matrix y = lstm.forward(x.value, grad ? &cache : nullptr);
    if (grad) x.grad += lstm.backward(cache, weights);
    return y.cwiseProduct(weights).sum();
  };
  return finish("bilstm", nn::finite_diff_gradcheck(loss, set));
}

LayerCheck check_attention(Rng& rng) {
  const Index t = dim(rng, 1, 7), h = dim(rng, 1, 5), a = dim(rng, 1, 5);
  nn::AttentionParams p("attention", h, a, rng.next_u64());
  // Larger queries give peaky weights, which is where mistakes show.
  p.query.value = normal_matrix(rng, 1, a, 2.0);
  nn::Parameter x("input", normal_matrix(rng, t, h));
  const RowVector weights = normal_matrix(rng, 1, h).row(0);
  nn::ParameterSet set;
  p.collect(set);
  set.add(x);
  auto loss = [&](bool grad) {
    const nn::AttentionResult r = nn::attention_pool(x.value, p);
    if (grad) x.grad += nn::attention_pool_backward(x.value, p, r, weights);
    return r.context.dot(weights);
  };
  return finish("attention", nn::finite_diff_gradcheck(loss, set));
}

LayerCheck check_maxpool(Rng& rng, double eps) {
  const Index t = dim(rng, 1, 7), c = dim(rng, 1, 5);
  // Redraw until every column's winner leads by a clear margin, so the
  // perturbed evaluations never switch rows.
  Matrix z;
  for (;;) {
    z = normal_matrix(rng, t, c);
    double gap = 1e300;
    for (Index j = 0; j < c && t > 1; ++j) {
      Vector col = z.col(j);
      std::sort(col.data(), col.data() + col.size(), std::greater<>());
      gap = std::min(gap, col(0) - col(1));
    }
    if (gap > 100.0 * eps) break;
  }
  nn::Parameter x("input", z);
  const RowVector weights = normal_matrix(rng, 1, c).row(0);
  nn::ParameterSet set;
  set.add(x);
  auto loss = [&](bool grad) {
    const nn::MaxPoolResult r = nn::max_pool_time(x.value);
    if (grad) x.grad += nn::max_pool_time_backward(r, weights, x.value.rows());
    return r.scores.dot(weights);
  };
  return finish("maxpool", nn::finite_diff_gradcheck(loss, set, eps));
}

LayerCheck check_cross_entropy(Rng& rng) {
  const Index c = dim(rng, 2, 5);
  const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));
  nn::Parameter logits("logits", normal_matrix(rng, 1, c, 2.0), true);
  nn::ParameterSet set;
  set.add(logits);
  auto loss = [&](bool grad) {
    const nn::LossResult r = nn::softmax_cross_entropy(logits.value.row(0), label);
    if (grad) logits.grad += r.grad;
    return r.loss;
  };
  return finish("cross_entropy", nn::finite_diff_gradcheck(loss, set));
}

}  // namespace

std::vector<LayerCheck> run_gradcheck_suite(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gradcheck"));
  std::vector<LayerCheck> out;
  out.push_back(check_linear(rng));
  out.push_back(check_lstm_cell(rng));
  out.push_back(check_bilstm(rng));
  out.push_back(check_attention(rng));
  out.push_back(check_maxpool(rng, 1e-4));
  out.push_back(check_cross_entropy(rng));
  return out;
}

}  // namespace eslu
