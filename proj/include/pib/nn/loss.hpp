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

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

namespace detail {

inline void check_labels(std::span<const int> labels, Index batch,
                         Index classes) {
  if (static_cast<Index>(labels.size()) != batch)
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(batch) + " samples");
  for (int y : labels)
    if (y < 0 || y >= classes)
      throw ConfigError("label " + std::to_string(y) + " outside [0, " +
                        std::to_string(classes) + ")");
}

// Column-wise softmax of a C x B logit matrix.
inline Matrix softmax_columns(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - m).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

// Per-sample -log softmax(z)_y of a C x B logit matrix.
inline Vector sample_cross_entropy(const Matrix& logits,
                                   std::span<const int> labels) {
  Vector out(logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out[j] = lse - logits(labels[static_cast<std::size_t>(j)], j);
  }
  return out;
}

}  // namespace detail

// Row-wise softmax of B x C logits.
inline Matrix softmax(const Matrix& logits) {
  return detail::softmax_columns(logits.transpose()).transpose();
}

// Per-sample cross-entropy losses of B x C logits.
inline Vector sample_losses(const Matrix& logits, std::span<const int> labels) {
  detail::check_labels(labels, logits.rows(), logits.cols());
  return detail::sample_cross_entropy(logits.transpose(), labels);
}

// Mean cross-entropy. With `clip`, each per-sample loss is capped at a before
// averaging, which makes the loss a/2-sub-Gaussian.
inline double cross_entropy(const Matrix& logits, std::span<const int> labels,
                            std::optional<double> clip = std::nullopt) {
  if (logits.cols() < 2) throw ConfigError("cross_entropy needs C >= 2");
  if (clip && !(*clip > 0.0)) throw ConfigError("loss clip bound must be > 0");
  Vector l = sample_losses(logits, labels);
  if (clip) l = l.cwiseMin(*clip);
  return l.mean();
}

}  // namespace pib
