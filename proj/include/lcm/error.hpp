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

#include <stdexcept>
#include <string>

namespace lcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of a primitive do not conform to its signature.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on caller-supplied values or configuration was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (corpus, embeddings, checkpoint, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcm
