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
#include <span>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

// A set of labelled samples, one row of `inputs` per sample.
struct Batch {
  RowMatrix inputs;
  std::vector<int> labels;

  Index size() const { return static_cast<Index>(labels.size()); }
  Index dim() const { return inputs.cols(); }

  Batch select(std::span<const Index> rows) const {
    Batch out;
    out.inputs.resize(static_cast<Index>(rows.size()), inputs.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.inputs.row(static_cast<Index>(i)) = inputs.row(rows[i]);
      out.labels[i] = labels[static_cast<std::size_t>(rows[i])];
    }
    return out;
  }
};

struct Dataset : Batch {
  int num_classes = 0;

  Dataset() = default;
  Dataset(RowMatrix x, std::vector<int> y, int classes)
      : Batch{std::move(x), std::move(y)}, num_classes(classes) {
    validate();
  }

  void validate() const {
    if (labels.empty()) throw ConfigError("dataset: no samples");
    if (inputs.rows() != size())
      throw ShapeError("dataset: " + std::to_string(inputs.rows()) +
                       " input rows for " + std::to_string(size()) +
                       " labels");
    if (num_classes < 1) throw ConfigError("dataset: num_classes < 1");
    for (int y : labels)
      if (y < 0 || y >= num_classes)
        throw ConfigError("dataset: label " + std::to_string(y) +
                          " outside [0, " + std::to_string(num_classes) + ")");
    if (!inputs.allFinite()) throw NumericError("dataset: non-finite input");
  }

  Dataset subset(std::span<const Index> rows) const {
    Dataset out;
    static_cast<Batch&>(out) = select(rows);
    out.num_classes = num_classes;
    return out;
  }

  std::vector<int> class_histogram() const {
    std::vector<int> h(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) ++h[static_cast<std::size_t>(y)];
    return h;
  }
};

}  // namespace pib
