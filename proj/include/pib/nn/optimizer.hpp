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
#include <string>
#include <string_view>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

enum class OptimizerKind { sgd, adam };

inline OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

inline std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  OptimizerConfig config;
  long step = 0;
  Vector m;  // adam only
  Vector v;  // adam only

  OptimizerState() = default;
  OptimizerState(const OptimizerConfig& cfg, Index dim) : config(cfg) {
    if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (cfg.kind == OptimizerKind::adam) {
      m = Vector::Zero(dim);
      v = Vector::Zero(dim);
    }
  }
};

// In-place update. SGD: params -= lr * grad. Adam: bias-corrected moments.
inline void optimizer_step(OptimizerState& state, ParamVector& params,
                           const Vector& grad) {
  if (grad.size() != params.size())
    throw ShapeError("gradient length differs from parameter length");
  ++state.step;
  const auto& c = state.config;
  if (c.kind == OptimizerKind::sgd) {
    params -= c.lr * grad;
    return;
  }
  if (state.m.size() != params.size())
    throw ShapeError("adam accumulators do not match parameter length");
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  params.array() -= c.lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + c.eps);
}

}  // namespace pib
