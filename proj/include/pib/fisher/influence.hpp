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

#include <string>
#include <vector>

#include <Eigen/LU>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/bootstrap.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/fisher/objectives.hpp"

namespace pib {

// Factorized H + damping I, reused across many right-hand sides.
class InfluenceSolver {
 public:
  InfluenceSolver(const Matrix& hessian, double damping) {
    if (hessian.rows() != hessian.cols()) throw ShapeError("Hessian must be square");
    if (damping < 0.0) throw ConfigError("damping must be non-negative");
    const Index d = hessian.rows();
    lu_.compute(hessian + damping * Matrix::Identity(d, d));
    if (!lu_.isInvertible()) throw NumericError("Hessian is singular even after damping");
  }

  Index dim() const { return lu_.rows(); }

  // psi = -(H + damping I)^{-1} g.
  Vector psi(const Vector& grad) const {
    if (grad.size() != dim()) throw ShapeError("gradient length mismatch");
    return -lu_.solve(grad);
  }

 private:
  Eigen::FullPivLU<Matrix> lu_;
};

inline Vector influence(const Matrix& hessian, const Vector& grad_j, double damping = 0.0) {
  return InfluenceSolver(hessian, damping).psi(grad_j);
}

// Predicted change of the minimizer when sample j is removed: -psi_j / n.
inline Vector predicted_loo_shift(const Vector& psi_j, Index n) {
  return -psi_j / static_cast<double>(n);
}

struct InfluenceSet {
  Matrix psi;  // n x D, row j = psi_j
};

// Influence of every sample of `objective` at `theta`.
template <Objective O>
InfluenceSet influence_set(const O& objective, const Vector& theta, const Matrix& hessian,
                           double damping = 0.0) {
  const InfluenceSolver solver(hessian, damping);
  const Matrix g = objective.per_sample_grads(theta);
  InfluenceSet out;
  out.psi.resize(g.rows(), g.cols());
  for (Index j = 0; j < g.rows(); ++j) out.psi.row(j) = solver.psi(g.row(j).transpose()).transpose();
  return out;
}

// (1/n) Psi^T (xi - 1).
inline Vector perturbed_shift(const InfluenceSet& set, const BootstrapWeights& xi) {
  const Index n = set.psi.rows();
  if (xi.size() != n) throw ShapeError("bootstrap weights length differs from influence rows");
  Vector centered(n);
  for (Index i = 0; i < n; ++i) centered[i] = xi.xi[static_cast<std::size_t>(i)] - 1.0;
  return set.psi.transpose() * centered / static_cast<double>(n);
}

}  // namespace pib
