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
#include <memory>
#include <variant>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/iiw/gradient_buffer.hpp"

namespace pib {

struct DenseCovariance {
  Matrix value;
};

struct DiagonalCovariance {
  Vector value;
};

// (1/n)(F + damping I)^{-1} with F the empirical Fisher of a gradient buffer.
// Materialized only up to the dense guard.
struct ImplicitFisherCovariance {
  std::shared_ptr<const GradientBuffer> fim;
  double damping = 0.0;
  Index n = 1;
};

struct GaussianSpec {
  Vector mean;
  std::variant<DenseCovariance, DiagonalCovariance, ImplicitFisherCovariance> covariance;

  Index dim() const { return mean.size(); }

  Matrix dense_covariance() const {
    if (const auto* d = std::get_if<DenseCovariance>(&covariance)) return d->value;
    if (const auto* d = std::get_if<DiagonalCovariance>(&covariance)) return d->value.asDiagonal();
    const auto& f = std::get<ImplicitFisherCovariance>(covariance);
    return prior_cov_fisher(*f.fim, f.n, f.damping);
  }
};

namespace detail {

inline void check_gaussian(const GaussianSpec& g) {
  const Index d = g.dim();
  if (const auto* c = std::get_if<DenseCovariance>(&g.covariance)) {
    if (c->value.rows() != d || c->value.cols() != d)
      throw ShapeError("covariance shape does not match mean length");
  } else if (const auto* f = std::get_if<ImplicitFisherCovariance>(&g.covariance)) {
    if (!f->fim || f->fim->empty()) throw ConfigError("implicit covariance without gradients");
    if (f->fim->dim() != d) throw ShapeError("covariance shape does not match mean length");
    if (!(f->damping > 0.0)) throw ConfigError("implicit covariance needs damping > 0");
  } else {
    const auto& v = std::get<DiagonalCovariance>(g.covariance).value;
    if (v.size() != d) throw ShapeError("covariance shape does not match mean length");
    if ((v.array() <= 0.0).any())
      throw NumericError("diagonal covariance is not positive definite");
  }
}

}  // namespace detail

// KL(post || prior) between two multivariate Gaussians:
//   1/2 [ log det S0 - log det S - D + (m - m0)^T S0^-1 (m - m0) + tr(S0^-1 S) ]
inline double gaussian_kl(const GaussianSpec& post, const GaussianSpec& prior) {
  detail::check_gaussian(post);
  detail::check_gaussian(prior);
  if (post.dim() != prior.dim()) throw ShapeError("gaussian dimensions differ");
  const Index d = post.dim();
  const Vector diff = post.mean - prior.mean;

  const auto* pd = std::get_if<DiagonalCovariance>(&post.covariance);
  const auto* qd = std::get_if<DiagonalCovariance>(&prior.covariance);
  if (pd && qd) {
    const auto& s = pd->value.array();
    const auto& s0 = qd->value.array();
    const double kl = (s0.log() - s.log()).sum() - static_cast<double>(d) +
                      (diff.array().square() / s0).sum() + (s / s0).sum();
    return std::max(0.0, 0.5 * kl);
  }

  const Matrix s = post.dense_covariance();
  const Matrix s0 = prior.dense_covariance();
  Eigen::LLT<Matrix> ls(s), ls0(s0);
  if (ls.info() != Eigen::Success)
    throw NumericError("posterior covariance is not positive definite");
  if (ls0.info() != Eigen::Success)
    throw NumericError("prior covariance is not positive definite");
  const double logdet = 2.0 * ls.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet0 = 2.0 * ls0.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = diff.dot(ls0.solve(diff));
  const double trace = ls0.solve(s).trace();
  return std::max(0.0, 0.5 * (logdet0 - logdet - static_cast<double>(d) + quad + trace));
}

}  // namespace pib
