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
#include <span>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

enum class BootstrapKind { poisson, multinomial };

// Per-sample resampling counts xi.
struct BootstrapWeights {
  BootstrapKind kind = BootstrapKind::poisson;
  std::vector<double> xi;

  Index size() const { return static_cast<Index>(xi.size()); }
  std::span<const double> span() const { return xi; }
  double total() const {
    double s = 0.0;
    for (double v : xi) s += v;
    return s;
  }
};

// i.i.d. Poisson(1) counts: the large-n limit of Binomial(n, 1/n).
inline BootstrapWeights poisson_weights(Index n, Rng& rng) {
  if (n < 1) throw ConfigError("poisson_weights: n must be >= 1");
  std::poisson_distribution<int> pois(1.0);
  BootstrapWeights w{BootstrapKind::poisson, std::vector<double>(static_cast<std::size_t>(n))};
  for (auto& v : w.xi) v = pois(rng);
  return w;
}

// Counts of n draws with replacement; sums to exactly n.
inline BootstrapWeights multinomial_bootstrap(Index n, Rng& rng) {
  if (n < 1) throw ConfigError("multinomial_bootstrap: n must be >= 1");
  std::uniform_int_distribution<Index> pick(0, n - 1);
  BootstrapWeights w{BootstrapKind::multinomial,
                     std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  for (Index k = 0; k < n; ++k) w.xi[static_cast<std::size_t>(pick(rng))] += 1.0;
  return w;
}

}  // namespace pib
