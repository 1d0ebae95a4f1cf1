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

// Brute-force reference computations. Each one takes a different route from
// the library code it checks: explicit loops instead of Eigen expressions,
// closed forms instead of iterative solvers, sampling instead of formulas.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pib/core/types.hpp"

namespace pib::oracle {

// Five-point central finite differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double rel_step = 1e-3) {
  Vector g(x.size());
  Vector p = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(x[i]));
    double v[4];
    const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int k = 0; k < 4; ++k) {
      p[i] = x[i] + offsets[k] * h;
      v[k] = f(p);
    }
    p[i] = x[i];
    g[i] = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
inline double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-8) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Dense (1/T) sum_t g_t g_t^T by explicit loops.
inline Matrix dense_fim_loops(const Matrix& grads) {
  const Index t = grads.rows(), d = grads.cols();
  Matrix f = Matrix::Zero(d, d);
  for (Index k = 0; k < t; ++k)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) f(i, j) += grads(k, i) * grads(k, j);
  return f / static_cast<double>(t);
}

// n delta^T F delta with F formed densely.
inline double dense_quadratic_form(const Matrix& grads, const Vector& delta, Index n) {
  const Matrix f = dense_fim_loops(grads);
  double q = 0.0;
  for (Index i = 0; i < f.rows(); ++i)
    for (Index j = 0; j < f.cols(); ++j) q += delta[i] * f(i, j) * delta[j];
  return static_cast<double>(n) * q;
}

// Monte-Carlo E_p[log p(x) - log q(x)] for full-covariance Gaussians.
inline double mc_gaussian_kl(const Vector& mp, const Matrix& sp, const Vector& mq,
                             const Matrix& sq, long samples, Rng& rng) {
  const Index d = mp.size();
  const Eigen::LLT<Matrix> lp(sp), lq(sq);
  const Matrix Lp = lp.matrixL(), Lq = lq.matrixL();
  double logdet_p = 0.0, logdet_q = 0.0;
  for (Index i = 0; i < d; ++i) {
    logdet_p += 2.0 * std::log(Lp(i, i));
    logdet_q += 2.0 * std::log(Lq(i, i));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d);
  double acc = 0.0;
  for (long s = 0; s < samples; ++s) {
    for (Index i = 0; i < d; ++i) z[i] = normal(rng);
    const Vector x = mp + Lp * z;
    const Vector wq = Lq.triangularView<Eigen::Lower>().solve(x - mq);
    // log p - log q; the (2 pi)^{d/2} terms cancel.
    acc += -0.5 * z.squaredNorm() - 0.5 * logdet_p + 0.5 * wq.squaredNorm() + 0.5 * logdet_q;
  }
  return acc / static_cast<double>(samples);
}

// Minimizer of (1/n) sum_i w_i (y_i - x_i.theta)^2 / 2 + (l2/2)||theta||^2
// through the weighted normal equations and an LDLT solve.
inline Vector ridge_weighted_solution(const Matrix& x, const Vector& y, double l2,
                                      const std::vector<double>& w) {
  const Index n = x.rows(), d = x.cols();
  Matrix a = Matrix::Zero(d, d);
  Vector b = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    a.noalias() += wi * x.row(i).transpose() * x.row(i);
    b.noalias() += wi * y[i] * x.row(i).transpose();
  }
  a /= static_cast<double>(n);
  b /= static_cast<double>(n);
  a += l2 * Matrix::Identity(d, d);
  return a.ldlt().solve(b);
}

// Leave-one-out ridge minimizer: weight 0 on sample j, normalization kept at 1/n.
inline Vector ridge_loo_solution(const Matrix& x, const Vector& y, double l2, Index j) {
  std::vector<double> w(static_cast<std::size_t>(x.rows()), 1.0);
  w[static_cast<std::size_t>(j)] = 0.0;
  return ridge_weighted_solution(x, y, l2, w);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// log det[(1/n)(F + eps I)^{-1}] from the eigenvalues of the dense matrix.
inline double dense_log_det_prior_cov(const Matrix& grads, double eps, Index n) {
  const Matrix f = dense_fim_loops(grads);
  const Index d = f.rows();
  const Matrix cov =
      (f + eps * Matrix::Identity(d, d)).inverse() / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()),
                                                  Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index i = 0; i < d; ++i) s += std::log(eig.eigenvalues()[i]);
  return s;
}

// Softmax of one row of logits, by loops.
inline Vector softmax_row(const Vector& z) {
  double m = z[0];
  for (Index i = 1; i < z.size(); ++i) m = std::max(m, z[i]);
  Vector p(z.size());
  double s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] - m));
  return p / s;
}

}  // namespace pib::oracle
