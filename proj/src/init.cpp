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

#include "lcm/init.hpp"

#include <cmath>
#include <vector>

namespace lcm {
namespace {

ad::Tensor uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return ad::Tensor::matrix(rows, cols, std::move(v));
}

}  // namespace

ad::Tensor init_embedding(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform(rows, cols, kEmbeddingInitBound, rng);
}

ad::Tensor init_dense(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform(fan_in, fan_out, bound, rng);
}

}  // namespace lcm
