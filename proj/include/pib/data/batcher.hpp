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

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

// Epoch-wise shuffled minibatches without replacement. A trailing partial
// batch is dropped and the next epoch starts with a fresh permutation.
class MinibatchSampler {
 public:
  MinibatchSampler(Index n, Index batch_size, Rng rng)
      : batch_(std::min(batch_size, n)), rng_(std::move(rng)) {
    if (n < 1) throw ConfigError("minibatch sampler over an empty set");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Index{0});
    pos_ = order_.size();
  }

  std::vector<Index> next() {
    if (pos_ + static_cast<std::size_t>(batch_) > order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      pos_ = 0;
    }
    std::vector<Index> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                           order_.begin() + static_cast<std::ptrdiff_t>(pos_ + static_cast<std::size_t>(batch_)));
    pos_ += static_cast<std::size_t>(batch_);
    return out;
  }

  Index batch_size() const { return batch_; }

 private:
  Index batch_;
  Rng rng_;
  std::vector<Index> order_;
  std::size_t pos_ = 0;
};

}  // namespace pib
