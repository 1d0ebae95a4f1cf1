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
#include <span>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/bootstrap.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/fisher/objectives.hpp"

namespace pib {

struct FitOptions {
  double tolerance = 1e-9;  // on the gradient norm
  long max_iterations = 1000000;
  double initial_step = 1.0;
};

struct FitResult {
  Vector theta;
  double grad_norm = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Full-batch gradient descent. Step sizes follow the Barzilai-Borwein rule
// s.y / y.y (s, y: last changes of theta and gradient); a step that raises
// the loss by more than round-off falls back to Armijo backtracking.
template <Objective O>
FitResult fit_gradient_descent(const O& objective, std::span<const double> weights,
                               const Vector& init, const FitOptions& opt = {}) {
  FitResult r;
  r.theta = init;
  LossGrad cur = objective.value_and_grad(r.theta, weights);
  double step = opt.initial_step;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    r.grad_norm = cur.grad.norm();
    if (!std::isfinite(r.grad_norm)) break;
    if (r.grad_norm <= opt.tolerance) break;
    const double g2 = r.grad_norm * r.grad_norm;
    const double slack = 1e-12 * (1.0 + std::abs(cur.loss));
    Vector trial = r.theta - step * cur.grad;
    LossGrad next = objective.value_and_grad(trial, weights);
    while (!(next.loss <= cur.loss + slack) || !next.grad.allFinite()) {
      step *= 0.5;
      if (step < 1e-30) break;
      trial = r.theta - step * cur.grad;
      next = objective.value_and_grad(trial, weights);
      if (next.loss <= cur.loss - 1e-4 * step * g2) break;
    }
    if (step < 1e-30) break;
    const Vector s = trial - r.theta;
    const Vector y = next.grad - cur.grad;
    const double sy = s.dot(y), yy = y.squaredNorm();
    r.theta = std::move(trial);
    cur = std::move(next);
    if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-12, 1e12);
  }
  r.grad_norm = cur.grad.norm();
  r.converged = r.grad_norm <= opt.tolerance;
  return r;
}

struct DefaultTrainer {
  FitOptions options;
  template <Objective O>
  FitResult operator()(const O& objective, std::span<const double> weights,
                       const Vector& init) const {
    return fit_gradient_descent(objective, weights, init, options);
  }
};

// (1/K) sum_k (theta_k - theta_hat)(theta_k - theta_hat)^T over K
// Poisson-reweighted refits warm-started at theta_hat.
template <Objective O, class Trainer = DefaultTrainer>
Matrix bootstrap_covariance_oracle(const O& objective, const Vector& theta_hat, int k,
                                   Rng& rng, const Trainer& trainer = {}) {
  if (k < 2) throw ConfigError("bootstrap oracle needs K >= 2");
  const Index n = objective.num_samples();
  const Index d = objective.num_params();
  if (theta_hat.size() != d) throw ShapeError("parameter length mismatch");
  std::vector<BootstrapWeights> draws;
  draws.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) draws.push_back(poisson_weights(n, rng));

  Matrix cov = Matrix::Zero(d, d);
  std::vector<int> failed;
  for (int i = 0; i < k; ++i) {
    const FitResult fit = trainer(objective, draws[static_cast<std::size_t>(i)].span(), theta_hat);
    if (!fit.converged) {
      failed.push_back(i);
      continue;
    }
    const Vector dev = fit.theta - theta_hat;
    cov.noalias() += dev * dev.transpose();
  }
  if (!failed.empty()) {
    std::string list;
    for (int i : failed) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw ConvergenceError("bootstrap refits did not converge for k = " + list);
  }
  return detail::symmetrize(cov / static_cast<double>(k));
}

}  // namespace pib
