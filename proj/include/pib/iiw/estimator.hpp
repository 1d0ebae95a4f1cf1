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
#include <deque>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/iiw/gradient_buffer.hpp"

namespace pib {

// Quadratic running average of the weights,
//   bar^2_t = rho * bar^2_{t-1} + (1 - rho) / K * sum_{k<K} theta^2_{t-k},
// taken elementwise. While fewer than K iterates have been seen the window
// sum is divided by the number available. An empty `theta_bar` is seeded
// with the first window average.
struct MovingAverageState {
  Vector theta_bar;
  double rho = 0.9;
  Index window = 1;
  std::deque<Vector> recent;

  MovingAverageState() = default;
  MovingAverageState(double rho_, Index window_, Vector start = {})
      : theta_bar(std::move(start)), rho(rho_), window(window_) {
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
    if (window < 1) throw ConfigError("moving-average window must be >= 1");
    if (theta_bar.size() > 0) theta_bar = theta_bar.cwiseAbs();
  }
};

inline void update_moving_average(MovingAverageState& s, const ParamVector& params) {
  if (s.theta_bar.size() > 0 && s.theta_bar.size() != params.size())
    throw ShapeError("moving average length differs from parameter length");
  s.recent.push_front(params);
  if (static_cast<Index>(s.recent.size()) > s.window) s.recent.pop_back();

  Vector window_sq = Vector::Zero(params.size());
  for (const auto& p : s.recent) window_sq += p.cwiseAbs2();
  window_sq /= static_cast<double>(s.recent.size());

  if (s.theta_bar.size() == 0) {
    s.theta_bar = window_sq.cwiseSqrt();
    return;
  }
  s.theta_bar =
      (s.rho * s.theta_bar.cwiseAbs2() + (1.0 - s.rho) * window_sq).cwiseSqrt();
}

// The running average carries magnitudes only; the sign of the current
// iterate is restored before subtracting the prior mean, so a run whose
// weights never move yields a zero displacement.
inline ParamVector iiw_displacement(const MovingAverageState& s,
                                    const ParamVector& current,
                                    const ParamVector& theta0) {
  if (current.size() != theta0.size() || s.theta_bar.size() != theta0.size())
    throw ShapeError("displacement operands differ in length");
  ParamVector signed_bar(current.size());
  for (Index i = 0; i < current.size(); ++i)
    signed_bar[i] = current[i] < 0.0 ? -s.theta_bar[i] : s.theta_bar[i];
  return signed_bar - theta0;
}

struct IiwEstimate {
  double value = 0.0;
  long t_index = 0;
  Index n = 0;
  Index t_used = 0;
};

// I~ = (n / T) sum_t (delta . g_t)^2 over the buffered gradients, i.e.
// n delta^T F delta without forming F.
inline IiwEstimate estimate_iiw(const ParamVector& delta, const GradientBuffer& buffer,
                                Index n, long t_index = 0) {
  if (buffer.empty()) throw ConfigError("estimate_iiw: empty gradient buffer");
  if (n < 1) throw ConfigError("estimate_iiw: n must be >= 1");
  const Vector proj = buffer.project(delta);
  return {static_cast<double>(n) / static_cast<double>(buffer.size()) *
              proj.squaredNorm(),
          t_index, n, buffer.size()};
}

// Streaming form: accumulate (delta . g_t)^2 one gradient at a time.
class IiwAccumulator {
 public:
  explicit IiwAccumulator(ParamVector delta) : delta_(std::move(delta)) {}

  void add_gradient(const Vector& g) {
    if (g.size() != delta_.size()) throw ShapeError("gradient length mismatch");
    add_projection(delta_.dot(g));
  }
  void add_projection(double p) {
    sum_sq_ += p * p;
    ++count_;
  }

  Index count() const { return count_; }

  IiwEstimate estimate(Index n, long t_index = 0) const {
    if (count_ == 0) throw ConfigError("IiwAccumulator: no gradients added");
    return {static_cast<double>(n) / static_cast<double>(count_) * sum_sq_,
            t_index, n, count_};
  }

 private:
  ParamVector delta_;
  double sum_sq_ = 0.0;
  Index count_ = 0;
};

// Expected generalization gap bound sqrt(2 sigma^2 I / n) for a
// sigma-sub-Gaussian loss.
inline double pac_bayes_bound(double sigma, Index n, double iiw) {
  if (n < 1) throw ConfigError("pac_bayes_bound: n must be >= 1");
  if (iiw < 0.0) throw ConfigError("pac_bayes_bound: negative information");
  return std::sqrt(2.0 * sigma * sigma * iiw / static_cast<double>(n));
}

}  // namespace pib
