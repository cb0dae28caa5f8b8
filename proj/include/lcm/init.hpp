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

#include <cstddef>

#include "lcm/autodiff.hpp"
#include "lcm/rng.hpp"

namespace lcm {

inline constexpr double kEmbeddingInitBound = 0.05;

/// rows x cols, uniform in [-0.05, 0.05].
ad::Tensor init_embedding(std::size_t rows, std::size_t cols, Rng& rng);

/// fan_in x fan_out, uniform with bound sqrt(6 / (fan_in + fan_out)).
ad::Tensor init_dense(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace lcm
