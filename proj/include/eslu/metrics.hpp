// eslu/metrics.hpp

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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace eslu {

/// Binary confusion tallies; class 1 (abnormal) is the positive class.
struct ConfusionCounts {
  std::uint64_t n_tp = 0;
  std::uint64_t n_fp = 0;
  std::uint64_t n_fn = 0;
  std::uint64_t n_tn = 0;

  std::uint64_t total() const { return n_tp + n_fp + n_fn + n_tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    n_tp += o.n_tp;
    n_fp += o.n_fp;
    n_fn += o.n_fn;
    n_tn += o.n_tn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) {
    return a += b;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts accumulate(ConfusionCounts c, int predicted, int actual);

// 0/0 yields 0.0; report() flags those cases.
double recall(const ConfusionCounts& c);
double precision(const ConfusionCounts& c);
double accuracy(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);

/// Harmonic mean of recall and precision, 0 when both are 0.
double f1_from(double recall, double precision);

struct MetricsReport {
  ConfusionCounts counts;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::vector<std::string> degenerate_flags;
};

MetricsReport report(const ConfusionCounts& c);

nlohmann::json to_json(const MetricsReport& r);

/// Fixed-width table: header "Model Recall Precision F1", one row, then a
/// footnote that states the recall/precision definitions used.
std::string format_table(const MetricsReport& r, const std::string& model_name);

}  // namespace eslu
