// Copyright (c) 2026 The lcmlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <map>
#include <string>

#include "lcm/autodiff.hpp"

namespace lcm::ad {

using Bindings = std::map<std::string, Var>;

/// Builds a scalar loss on `tape` from the bound parameters.
using LossBuilder = std::function<Var(Tape& tape, const Bindings& params)>;

/// Evaluates `build` on a fresh tape with `params` bound as parameters.
double evaluate_loss(const LossBuilder& build, const TensorMap& params);

/// Loss value plus reverse-mode gradients for every entry of `params`.
std::pair<double, GradientMap> loss_and_gradients(const LossBuilder& build,
                                                  const TensorMap& params);

/// Compares backprop against central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) on every coordinate of every parameter and
/// returns the largest relative error. Coordinates where both magnitudes are
/// below 1e-8 contribute their absolute error instead.
///
/// Rejects eps outside [1e-7, 1e-3] and builders whose two evaluations at
/// the same point disagree.
double grad_check(const LossBuilder& build, const TensorMap& params, double eps);

}  // namespace lcm::ad
