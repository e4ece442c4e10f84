// eslu/metrics.cpp

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

#include "eslu/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace eslu {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts accumulate(ConfusionCounts c, int predicted, int actual) {
  if (predicted == 1) {
    (actual == 1 ? c.n_tp : c.n_fp) += 1;
  } else {
    (actual == 1 ? c.n_fn : c.n_tn) += 1;
  }
  return c;
}

double recall(const ConfusionCounts& c) { return ratio(c.n_tp, c.n_tp + c.n_fn); }
double precision(const ConfusionCounts& c) { return ratio(c.n_tp, c.n_tp + c.n_fp); }
double accuracy(const ConfusionCounts& c) { return ratio(c.n_tp + c.n_tn, c.total()); }

double f1_from(double r, double p) {
  const double den = r + p;
  return den == 0.0 ? 0.0 : 2.0 * r * p / den;
}

double f1(const ConfusionCounts& c) { return f1_from(recall(c), precision(c)); }

MetricsReport report(const ConfusionCounts& c) {
  MetricsReport r;
  r.counts = c;
  r.recall = recall(c);
  r.precision = precision(c);
  r.f1 = f1(c);
  r.accuracy = accuracy(c);
  if (c.n_tp + c.n_fn == 0) r.degenerate_flags.emplace_back("recall: no actual positives");
  if (c.n_tp + c.n_fp == 0) r.degenerate_flags.emplace_back("precision: no predicted positives");
  if (r.recall + r.precision == 0.0) r.degenerate_flags.emplace_back("f1: recall + precision = 0");
  if (c.total() == 0) r.degenerate_flags.emplace_back("accuracy: empty set");
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {
      {"recall", r.recall},
      {"precision", r.precision},
      {"f1", r.f1},
      {"accuracy", r.accuracy},
      {"counts",
       {{"tp", r.counts.n_tp}, {"fp", r.counts.n_fp}, {"fn", r.counts.n_fn}, {"tn", r.counts.n_tn}}},
      {"degenerate_flags", r.degenerate_flags},
  };
}

std::string format_table(const MetricsReport& r, const std::string& model_name) {
  char line[512];
  std::string out;
  const int width = std::max<int>(32, static_cast<int>(model_name.size()));
  std::snprintf(line, sizeof line, "%-*s %10s %10s %10s\n", width, "Model", "Recall", "Precision",
                "F1");
  out += line;
  std::snprintf(line, sizeof line, "%-*s %9.2f%% %9.2f%% %9.2f%%\n", width, model_name.c_str(),
                100.0 * r.recall, 100.0 * r.precision, 100.0 * r.f1);
  out += line;
  std::snprintf(line, sizeof line,
                "# counts: TP=%llu FP=%llu FN=%llu TN=%llu accuracy=%.4f\n",
                static_cast<unsigned long long>(r.counts.n_tp),
                static_cast<unsigned long long>(r.counts.n_fp),
                static_cast<unsigned long long>(r.counts.n_fn),
                static_cast<unsigned long long>(r.counts.n_tn), r.accuracy);
  out += line;
  out += "# recall = TP/(TP+FN), precision = TP/(TP+FP); F1 is symmetric in the two.\n";
  for (const auto& flag : r.degenerate_flags) out += "# degenerate: " + flag + "\n";
  return out;
}

}  // namespace eslu
