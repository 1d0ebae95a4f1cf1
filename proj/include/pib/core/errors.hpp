// Copyright 2026 The pibnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace pib {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension disagreement between params, inputs, labels or buffers.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument values: empty inputs, labels out of range, bad rates.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A dense D x D path was requested above the materialization guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, int layer = -1)
      : Error(layer >= 0 ? what + " (layer " + std::to_string(layer) + ")"
                         : what),
        layer_(layer) {}

  // Index of the layer whose output went non-finite, -1 if not layer related.
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace pib
