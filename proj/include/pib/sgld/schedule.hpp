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
#include <numbers>
#include <string>
#include <string_view>

#include "pib/core/errors.hpp"

namespace pib {

enum class DecayKind { cosine, constant, inverse_sqrt };

inline std::string_view to_string(DecayKind k) {
  switch (k) {
    case DecayKind::cosine: return "cosine";
    case DecayKind::constant: return "constant";
    case DecayKind::inverse_sqrt: return "inverse_sqrt";
  }
  return "?";
}

inline DecayKind parse_decay(std::string_view s) {
  if (s == "cosine") return DecayKind::cosine;
  if (s == "constant") return DecayKind::constant;
  if (s == "inverse_sqrt") return DecayKind::inverse_sqrt;
  throw ConfigError("unknown decay '" + std::string(s) + "'");
}

// Value at step t of a schedule starting at value0 and ending at `horizon`;
// never below `floor`. t beyond the horizon is clamped.
inline double schedule(double value0, long t, long horizon, DecayKind kind, double floor = 0.0) {
  const double h = static_cast<double>(std::max(horizon, 1L));
  const double s = static_cast<double>(std::clamp(t, 0L, std::max(horizon, 1L)));
  double v = value0;
  switch (kind) {
    case DecayKind::cosine:
      v = value0 * 0.5 * (1.0 + std::cos(std::numbers::pi * s / h));
      break;
    case DecayKind::constant:
      break;
    case DecayKind::inverse_sqrt:
      v = value0 / std::sqrt(1.0 + s);
      break;
  }
  return std::max(v, floor);
}

}  // namespace pib
