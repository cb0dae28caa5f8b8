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

// Small shared fixtures for the unit tests.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lcm/autodiff.hpp"
#include "lcm/data.hpp"
#include "lcm/rng.hpp"

namespace lcm::testing {

inline ad::Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return ad::Tensor::matrix(rows, cols, std::move(v));
}

inline ad::Tensor random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return ad::Tensor::vector(std::move(v));
}

inline std::vector<double> random_distribution(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) total += (x = rng.uniform(0.01, 1.0));
  for (double& x : v) x /= total;
  return v;
}

inline data::Example text_example(std::vector<std::int32_t> ids, std::int32_t label, std::size_t pad_to = 0) {
  data::Example ex;
  ex.length = ids.size();
  ex.label = label;
  ex.token_ids = std::move(ids);
  if (ex.token_ids.size() < pad_to) ex.token_ids.resize(pad_to, data::kPadId);
  return ex;
}

}  // namespace lcm::testing
