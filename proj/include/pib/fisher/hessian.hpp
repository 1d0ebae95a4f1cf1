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

#include "pib/core/types.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/fisher/objectives.hpp"

namespace pib {

struct HessianResult {
  Matrix hessian;            // symmetrized
  double asymmetry = 0.0;    // max |H_ij - H_ji| before symmetrization
};

// Central differences of the analytic gradient with per-coordinate step
// h_j = 1e-5 (1 + |theta_j|).
template <Objective O>
HessianResult hessian_with_defect(const O& objective, const Vector& theta,
                                  Index guard = kDenseGuard) {
  const Index d = objective.num_params();
  detail::check_dense_guard(d, guard);
  if (theta.size() != d) throw ShapeError("parameter length mismatch");
  Matrix h(d, d);
  Vector probe = theta;
  for (Index j = 0; j < d; ++j) {
    const double step = 1e-5 * (1.0 + std::abs(theta[j]));
    probe[j] = theta[j] + step;
    const Vector gp = objective.value_and_grad(probe, {}).grad;
    probe[j] = theta[j] - step;
    const Vector gm = objective.value_and_grad(probe, {}).grad;
    probe[j] = theta[j];
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  HessianResult out;
  out.asymmetry = (h - h.transpose()).cwiseAbs().maxCoeff();
  out.hessian = detail::symmetrize(h);
  return out;
}

template <Objective O>
Matrix hessian_exact(const O& objective, const Vector& theta, Index guard = kDenseGuard) {
  return hessian_with_defect(objective, theta, guard).hessian;
}

inline Matrix hessian_exact(const NetworkSpec& spec, const ParamVector& params,
                            const Dataset& data, Index guard = kDenseGuard) {
  return hessian_exact(NetworkObjective{spec, &data, 0.0, std::nullopt}, params, guard);
}

enum class FisherKind { model, empirical };

// ||H - F||_F / ||F||_F for the unregularized cross-entropy.
inline double hessian_fisher_gap(const NetworkSpec& spec, const ParamVector& params,
                                 const Dataset& data, FisherKind kind = FisherKind::model,
                                 Index guard = kDenseGuard) {
  const Matrix h = hessian_exact(spec, params, data, guard);
  const Matrix f = kind == FisherKind::model
                       ? model_fisher(spec, params, data, guard)
                       : empirical_fim_dense(per_sample_grads(spec, params, data), guard);
  const double fn = f.norm();
  if (fn == 0.0) throw NumericError("Fisher matrix is identically zero");
  return (h - f).norm() / fn;
}

}  // namespace pib
