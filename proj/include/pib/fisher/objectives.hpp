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
#include <concepts>
#include <optional>
#include <span>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/dataset.hpp"
#include "pib/nn/gradients.hpp"

namespace pib {

// Empirical risk (1/n) sum_i xi_i l_i(theta) + R(theta) over a fixed sample
// set. `per_sample_grads` returns the n x D gradients of the data terms l_i
// alone; the regularizer R is never reweighted.
template <class O>
concept Objective = requires(const O& o, const Vector& theta,
                             std::span<const double> weights) {
  { o.num_params() } -> std::convertible_to<Index>;
  { o.num_samples() } -> std::convertible_to<Index>;
  { o.value_and_grad(theta, weights) } -> std::convertible_to<LossGrad>;
  { o.per_sample_grads(theta) } -> std::convertible_to<Matrix>;
};

namespace detail {

inline void check_weights(std::span<const double> w, Index n) {
  if (!w.empty() && static_cast<Index>(w.size()) != n)
    throw ShapeError("sample weights length differs from sample count");
}

inline double weight_at(std::span<const double> w, Index i) {
  return w.empty() ? 1.0 : w[static_cast<std::size_t>(i)];
}

}  // namespace detail

// Cross-entropy of a network on a dataset plus (l2 / 2) ||theta||^2.
struct NetworkObjective {
  NetworkSpec spec;
  const Dataset* data = nullptr;
  double l2 = 0.0;
  std::optional<double> clip;

  Index num_params() const { return spec.num_params(); }
  Index num_samples() const { return data->size(); }

  LossGrad value_and_grad(const Vector& theta, std::span<const double> w = {}) const {
    LossOptions opt;
    opt.clip = clip;
    opt.weights = w;
    LossGrad lg = loss_and_grad(spec, theta, *data, opt);
    if (l2 > 0.0) {
      lg.loss += 0.5 * l2 * theta.squaredNorm();
      lg.grad += l2 * theta;
    }
    return lg;
  }

  Matrix per_sample_grads(const Vector& theta) const {
    return pib::per_sample_grads(spec, theta, *data, clip);
  }
};

// Squared loss l_i = (y_i - x_i . theta)^2 / 2 plus (l2 / 2) ||theta||^2.
struct LinearRegressionObjective {
  Matrix x;  // n x D
  Vector y;
  double l2 = 0.0;

  Index num_params() const { return x.cols(); }
  Index num_samples() const { return x.rows(); }

  LossGrad value_and_grad(const Vector& theta, std::span<const double> w = {}) const {
    detail::check_weights(w, num_samples());
    const Vector r = x * theta - y;
    Vector wr = r;
    for (Index i = 0; i < r.size(); ++i) wr[i] *= detail::weight_at(w, i);
    const double n = static_cast<double>(num_samples());
    LossGrad out;
    out.loss = 0.5 * r.dot(wr) / n + 0.5 * l2 * theta.squaredNorm();
    out.grad = x.transpose() * wr / n + l2 * theta;
    return out;
  }

  Matrix per_sample_grads(const Vector& theta) const {
    const Vector r = x * theta - y;
    return r.asDiagonal() * x;
  }

  Matrix hessian() const {
    return x.transpose() * x / static_cast<double>(num_samples()) +
           l2 * Matrix::Identity(num_params(), num_params());
  }
};

// Binary logistic loss l_i = log(1 + e^z) - y_i z, z = x_i . theta, y in {0,1},
// plus (l2 / 2) ||theta||^2.
struct LogisticRegressionObjective {
  Matrix x;  // n x D
  Vector y;
  double l2 = 0.0;

  Index num_params() const { return x.cols(); }
  Index num_samples() const { return x.rows(); }

  static double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  LossGrad value_and_grad(const Vector& theta, std::span<const double> w = {}) const {
    detail::check_weights(w, num_samples());
    const Vector z = x * theta;
    Vector coef(z.size());
    double loss = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      const double wi = detail::weight_at(w, i);
      loss += wi * (softplus(z[i]) - y[i] * z[i]);
      coef[i] = wi * (sigmoid(z[i]) - y[i]);
    }
    const double n = static_cast<double>(num_samples());
    return {loss / n + 0.5 * l2 * theta.squaredNorm(),
            x.transpose() * coef / n + l2 * theta};
  }

  Matrix per_sample_grads(const Vector& theta) const {
    const Vector z = x * theta;
    Vector r(z.size());
    for (Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - y[i];
    return r.asDiagonal() * x;
  }

  Matrix hessian(const Vector& theta) const {
    const Vector z = x * theta;
    Vector s(z.size());
    for (Index i = 0; i < z.size(); ++i) s[i] = sigmoid(z[i]) * (1.0 - sigmoid(z[i]));
    return x.transpose() * s.asDiagonal() * x / static_cast<double>(num_samples()) +
           l2 * Matrix::Identity(num_params(), num_params());
  }
};

static_assert(Objective<NetworkObjective>);
static_assert(Objective<LinearRegressionObjective>);
static_assert(Objective<LogisticRegressionObjective>);

}  // namespace pib
