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
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/dataset.hpp"
#include "pib/iiw/gradient_buffer.hpp"
#include "pib/nn/gradients.hpp"
#include "pib/nn/loss.hpp"

namespace pib {

// Largest parameter count for which D x D matrices are materialized.
inline constexpr Index kDenseGuard = 2000;

namespace detail {

inline void check_dense_guard(Index dim, Index guard) {
  if (dim > guard)
    throw CapacityError("dimension " + std::to_string(dim) + " exceeds the dense guard " +
                        std::to_string(guard) + "; use the implicit buffer path");
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

// (1/T) G^T G for a T x D matrix of gradients.
inline Matrix empirical_fim_dense(const Matrix& grads, Index guard = kDenseGuard) {
  detail::check_dense_guard(grads.cols(), guard);
  if (grads.rows() == 0) throw ConfigError("empirical FIM needs at least one gradient");
  Matrix f = Matrix::Zero(grads.cols(), grads.cols());
  f.selfadjointView<Eigen::Lower>().rankUpdate(grads.transpose());
  f = f.selfadjointView<Eigen::Lower>();
  return f / static_cast<double>(grads.rows());
}

inline Matrix empirical_fim_dense(const GradientBuffer& buffer, Index guard = kDenseGuard) {
  return empirical_fim_dense(buffer.matrix(), guard);
}

// F v = (1/T) sum_t g_t (g_t . v) without forming F.
inline Vector fim_vector_product(const GradientBuffer& buffer, const Vector& v) {
  if (buffer.empty()) throw ConfigError("FIM product on an empty gradient buffer");
  const Vector proj = buffer.project(v);
  Vector out = Vector::Zero(buffer.dim());
  for (Index t = 0; t < buffer.size(); ++t) out.noalias() += proj[t] * buffer[t];
  return out / static_cast<double>(buffer.size());
}

// Default Tikhonov damping: 1e-8 times the mean diagonal of F.
inline double default_damping(const GradientBuffer& buffer) {
  return 1e-8 * buffer.mean_fisher_diagonal();
}

inline double default_damping(const Matrix& fim) {
  return fim.rows() == 0 ? 0.0 : 1e-8 * fim.diagonal().mean();
}

// (1/n) (F + damping I)^{-1}.
inline Matrix prior_cov_fisher(const Matrix& fim, Index n, double damping) {
  if (n < 1) throw ConfigError("sample count must be positive");
  if (damping < 0.0) throw ConfigError("damping must be non-negative");
  const Index d = fim.rows();
  const Matrix a = detail::symmetrize(fim) + damping * Matrix::Identity(d, d);
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericError("F + damping I is singular");
  return detail::symmetrize(lu.inverse()) / static_cast<double>(n);
}

inline Matrix prior_cov_fisher(const GradientBuffer& buffer, Index n, double damping,
                               Index guard = kDenseGuard) {
  return prior_cov_fisher(empirical_fim_dense(buffer, guard), n, damping);
}

// log det[(1/n) (F + eps I)^{-1}] from the T x T Gram matrix (1/T) G G^T.
// The nonzero spectrum of F equals that of the Gram matrix; the remaining
// D - r directions contribute log eps each.
inline double log_det_prior_cov(const GradientBuffer& buffer, double damping, Index n) {
  if (!(damping > 0.0)) throw ConfigError("log-det damping must be > 0");
  if (buffer.empty()) throw ConfigError("log-det on an empty gradient buffer");
  if (n < 1) throw ConfigError("sample count must be positive");
  const Index t = buffer.size();
  const Index d = buffer.dim();
  Matrix gram(t, t);
  for (Index i = 0; i < t; ++i)
    for (Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = buffer[i].dot(buffer[j]);
  gram /= static_cast<double>(t);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const Vector& mu = eig.eigenvalues();
  // The Gram matrix has min(T, D) possibly-nonzero eigenvalues; any extra
  // ones are exact zeros of F and fold into the damping term.
  const Index r = std::min(t, d);
  double s = 0.0;
  for (Index i = t - r; i < t; ++i) s -= std::log(std::max(mu[i], 0.0) + damping);
  s -= static_cast<double>(d - r) * std::log(damping);
  s -= static_cast<double>(d) * std::log(static_cast<double>(n));
  return s;
}

// Fisher of the model's own predictive distribution,
// (1/n) sum_i sum_c p_c(x_i) g_ic g_ic^T with g_ic the gradient of -log p_c.
// It coincides with the generalized Gauss-Newton part of the Hessian.
inline Matrix model_fisher(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
                           Index guard = kDenseGuard) {
  detail::check_dense_guard(spec.num_params(), guard);
  const Index d = spec.num_params();
  const int c = data.num_classes;
  const Matrix probs = softmax(forward(spec, params, data.inputs));
  Matrix f = Matrix::Zero(d, d);
  for (int k = 0; k < c; ++k) {
    Batch relabeled{data.inputs, std::vector<int>(static_cast<std::size_t>(data.size()), k)};
    const Matrix g = per_sample_grads(spec, params, relabeled);
    const Matrix scaled = probs.col(k).cwiseSqrt().asDiagonal() * g;
    f.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  }
  f = f.selfadjointView<Eigen::Lower>();
  return f / static_cast<double>(data.size());
}

}  // namespace pib
