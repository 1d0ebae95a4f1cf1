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

#include <random>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
// 1 / (1 - rate), so that E[mask] = 1.
inline Matrix dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1)");
  if (rate == 0.0) return Matrix::Ones(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) mask(i, j) = keep(rng) ? keep_scale : 0.0;
  return mask;
}

inline Matrix apply_dropout(const Matrix& activations, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1)");
  if (rate == 0.0) return activations;
  return activations.cwiseProduct(
      dropout_mask(activations.rows(), activations.cols(), rate, rng));
}

}  // namespace pib
