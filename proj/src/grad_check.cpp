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

#include "lcm/grad_check.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "lcm/error.hpp"

namespace lcm::ad {
namespace {

Var bind_and_build(Tape& tape, const LossBuilder& build, const TensorMap& params) {
  Bindings bound;
  for (const auto& [name, value] : params) bound.emplace(name, tape.parameter(name, value));
  return build(tape, bound);
}

}  // namespace

double evaluate_loss(const LossBuilder& build, const TensorMap& params) {
  Tape tape;
  return tape.value(bind_and_build(tape, build, params)).item();
}

std::pair<double, GradientMap> loss_and_gradients(const LossBuilder& build,
                                                  const TensorMap& params) {
  Tape tape;
  Var loss = bind_and_build(tape, build, params);
  return {tape.value(loss).item(), tape.backprop(loss)};
}

double grad_check(const LossBuilder& build, const TensorMap& params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ValidationError("grad_check: eps must lie in [1e-7, 1e-3], got " + std::to_string(eps));
  }
  auto [base, grads] = loss_and_gradients(build, params);
  const double again = evaluate_loss(build, params);
  if (std::bit_cast<std::uint64_t>(base) != std::bit_cast<std::uint64_t>(again)) {
    throw ValidationError("grad_check: loss builder is not deterministic");
  }

  double worst = 0.0;
  TensorMap probe = params;
  for (const auto& [name, value] : params) {
    const Tensor& analytic = grads.at(name);
    Tensor& slot = probe.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      slot[i] = orig + eps;
      const double up = evaluate_loss(build, probe);
      slot[i] = orig - eps;
      const double down = evaluate_loss(build, probe);
      slot[i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[i];
      const double abs_err = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      worst = std::max(worst, scale < 1e-8 ? abs_err : abs_err / scale);
    }
  }
  return worst;
}

}  // namespace lcm::ad
