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
#include <numeric>
#include <vector>

#include "pib/data/dataset.hpp"
#include "pib/nn/gradients.hpp"

namespace pib {

// Index of the largest entry of each row; ties go to the lowest index.
inline std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

inline double accuracy_of(const Matrix& scores, std::span<const int> labels) {
  if (labels.empty()) throw ConfigError("accuracy of an empty set");
  const auto pred = argmax_rows(scores);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean cross-entropy and accuracy over a dataset, evaluated in chunks.
inline Evaluation evaluate(const NetworkSpec& spec, const ParamVector& params,
                           const Batch& data, Index chunk = 1024) {
  if (data.size() < 1) throw ConfigError("evaluation of an empty dataset");
  double loss = 0.0;
  std::size_t hit = 0;
  std::vector<Index> idx;
  for (Index start = 0; start < data.size(); start += chunk) {
    const Index stop = std::min(data.size(), start + chunk);
    idx.resize(static_cast<std::size_t>(stop - start));
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = data.select(idx);
    const Matrix logits = forward(spec, params, b.inputs);
    loss += sample_losses(logits, b.labels).sum();
    const auto pred = argmax_rows(logits);
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == b.labels[i];
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(hit) / n};
}

inline double accuracy(const NetworkSpec& spec, const ParamVector& params,
                       const Batch& data) {
  return evaluate(spec, params, data).accuracy;
}

}  // namespace pib
