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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/data/dataset.hpp"

namespace pib {

// C isotropic unit-variance Gaussian clusters in d dimensions whose means are
// pairwise `separation` apart (simplex corners when C <= d, otherwise evenly
// spaced along the first axis so that neighbours are `separation` apart).
// Labels are balanced: class counts differ by at most one.
inline Dataset synthetic_blobs(Index n, Index d, int classes, double separation,
                               Rng& rng) {
  if (classes < 2) throw ConfigError("synthetic_blobs: need >= 2 classes");
  if (d < 1) throw ConfigError("synthetic_blobs: need d >= 1");
  if (n < classes) throw ConfigError("synthetic_blobs: need n >= classes");

  RowMatrix means = RowMatrix::Zero(classes, d);
  for (int c = 0; c < classes; ++c) {
    if (classes <= d)
      means(c, c) = separation / std::sqrt(2.0);
    else
      means(c, 0) = separation * c;
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % classes);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  RowMatrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      x(i, j) = means(labels[static_cast<std::size_t>(i)], j) + noise(rng);
  return Dataset(std::move(x), std::move(labels), classes);
}

// Flips exactly floor(ratio * n) uniformly chosen labels, each to a uniformly
// random class different from the original.
inline Dataset corrupt_labels(const Dataset& ds, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw ConfigError("corrupt_labels: ratio must lie in [0, 1]");
  if (ds.num_classes < 2 && ratio > 0.0)
    throw ConfigError("corrupt_labels: need >= 2 classes");
  const auto n = static_cast<std::size_t>(ds.size());
  const auto m = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> all(n), chosen;
  std::iota(all.begin(), all.end(), std::size_t{0});
  chosen.reserve(m);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), m, rng);

  Dataset out = ds;
  std::uniform_int_distribution<int> other(0, std::max(0, ds.num_classes - 2));
  for (std::size_t i : chosen) {
    const int r = other(rng);
    out.labels[i] = r >= ds.labels[i] ? r + 1 : r;
  }
  return out;
}

// Replaces every label by an independent uniform draw over the classes.
inline Dataset randomize_labels(const Dataset& ds, Rng& rng) {
  Dataset out = ds;
  std::uniform_int_distribution<int> cls(0, ds.num_classes - 1);
  for (auto& y : out.labels) y = cls(rng);
  return out;
}

// m distinct rows in their original order.
inline std::vector<Index> sample_indices(Index n, Index m, Rng& rng) {
  if (m < 1 || m > n)
    throw ConfigError("subsample size " + std::to_string(m) + " outside [1, " +
                      std::to_string(n) + "]");
  std::vector<Index> all(static_cast<std::size_t>(n)), out;
  std::iota(all.begin(), all.end(), Index{0});
  out.reserve(static_cast<std::size_t>(m));
  std::sample(all.begin(), all.end(), std::back_inserter(out), m, rng);
  return out;
}

inline Dataset subsample(const Dataset& ds, Index m, Rng& rng) {
  return ds.subset(sample_indices(ds.size(), m, rng));
}

}  // namespace pib
