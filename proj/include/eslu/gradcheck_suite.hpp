// eslu/gradcheck_suite.hpp

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

// Finite-difference checks of every hand-written backward pass on small
// random problems. Shared by the `gradcheck` command and the test suite.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eslu {

struct LayerCheck {
  std::string layer;
  double max_rel_error = 0.0;
  std::string worst_parameter;
};

/// Layers: linear, lstm_cell (3-step BPTT), bilstm (2 layers), attention,
/// maxpool (argmax gaps kept well above the difference step) and
/// cross_entropy. Dimensions are drawn from [1, 5], sequence lengths from
/// [1, 7], all from `seed`.
std::vector<LayerCheck> run_gradcheck_suite(std::uint64_t seed);

inline constexpr double kGradcheckTolerance = 1e-4;

}  // namespace eslu
