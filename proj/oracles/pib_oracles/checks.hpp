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

// Small-scale validation checks shared by the acceptance suite and the
// `oracle-validate` command. Each compares a library computation with an
// independent reference from oracles.hpp.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pib/data/bootstrap.hpp"
#include "pib/data/synthetic.hpp"
#include "pib/fisher/bootstrap_oracle.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/fisher/hessian.hpp"
#include "pib/fisher/influence.hpp"
#include "pib/fisher/objectives.hpp"
#include "pib/iiw/estimator.hpp"
#include "pib/iiw/gaussian_kl.hpp"
#include "pib/nn/gradients.hpp"
#include "pib/nn/network.hpp"
#include "pib/nn/optimizer.hpp"
#include "pib/sgld/sampler.hpp"
#include "pib_oracles/oracles.hpp"

namespace pib::oracle {

struct CheckResult {
  std::string stage;
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline CheckResult at_most(std::string stage, std::string metric, double value, double limit) {
  return {std::move(stage), std::move(metric), value, limit, std::isfinite(value) && value <= limit};
}

inline CheckResult at_least(std::string stage, std::string metric, double value, double limit) {
  return {std::move(stage), std::move(metric), value, limit, std::isfinite(value) && value >= limit};
}

inline Matrix random_matrix(Index r, Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

inline Vector random_vector(Index n, Rng& rng, double scale = 1.0) {
  return random_matrix(n, 1, rng, scale).col(0);
}

// Analytic vs five-point finite-difference gradients of the mean
// cross-entropy for a 3-layer network with the given activation. For ReLU
// the draw is repeated until no pre-activation lies near the kink, where
// finite differences are undefined.
inline double gradient_relative_error(Activation act, std::uint64_t seed) {
  Rng rng = make_rng(seed, 100 + static_cast<std::uint64_t>(act));
  const NetworkSpec spec{{6, 8, 7, 4}, act};
  for (int attempt = 0;; ++attempt) {
    ParamVector params = init_params(spec, rng) + random_vector(spec.num_params(), rng, 0.1);
    Batch batch{random_matrix(10, 6, rng), {}};
    std::uniform_int_distribution<int> label(0, 3);
    for (int i = 0; i < 10; ++i) batch.labels.push_back(label(rng));
    if (act == Activation::relu) {
      // Smallest |pre-activation| over both hidden layers.
      Matrix a = batch.inputs.transpose();
      double margin = 1e300;
      for (Index l = 0; l + 1 < spec.num_layers(); ++l) {
        Matrix z = layer_weights(spec, params, l) * a;
        z.colwise() += layer_bias(spec, params, l);
        margin = std::min(margin, z.cwiseAbs().minCoeff());
        a = z.cwiseMax(0.0);
      }
      if (margin < 0.02 && attempt < 1000) continue;
    }
    const Vector analytic = loss_and_grad(spec, params, batch).grad;
    const Vector numeric = fd_gradient(
        [&](const Vector& p) { return loss_and_grad(spec, p, batch).loss; }, params, 1e-4);
    return max_relative_error(analytic, numeric, 1e-4);
  }
}

inline CheckResult check_gradients(std::uint64_t seed = 1) {
  double worst = 0.0;
  for (Activation a : {Activation::linear, Activation::tanh, Activation::relu, Activation::sigmoid})
    worst = std::max(worst, gradient_relative_error(a, seed));
  return at_most("nn-core", "max relative gradient error (4 activations)", worst, 1e-6);
}

inline CheckResult check_iiw_fast_path(std::uint64_t seed = 1) {
  Rng rng = make_rng(seed, 200);
  const Matrix g = random_matrix(200, 50, rng);
  const Vector delta = random_vector(50, rng);
  GradientBuffer buf(200, 50);
  buf.push_rows(g);
  const double fast = estimate_iiw(delta, buf, 1000).value;
  const double dense = dense_quadratic_form(g, delta, 1000);
  return at_most("iiw-estimator", "relative error of gradient-projection IIW vs dense form",
                 std::abs(fast - dense) / std::abs(dense), 1e-10);
}

inline Matrix random_spd(Index d, Rng& rng) {
  const Matrix a = random_matrix(d, d, rng, 0.7);
  return a * a.transpose() + 0.5 * Matrix::Identity(d, d);
}

inline CheckResult check_gaussian_kl(std::uint64_t seed = 1, long samples = 1000000) {
  Rng rng = make_rng(seed, 300);
  const Vector mp = random_vector(3, rng, 0.5), mq = random_vector(3, rng, 0.5);
  const Matrix sp = random_spd(3, rng), sq = random_spd(3, rng);
  const double closed = gaussian_kl({mp, DenseCovariance{sp}}, {mq, DenseCovariance{sq}});
  const double mc = mc_gaussian_kl(mp, sp, mq, sq, samples, rng);
  return at_most("iiw-estimator", "relative gap closed-form vs Monte-Carlo KL",
                 std::abs(closed - mc) / std::abs(mc), 0.02);
}

// Ridge regression with n large enough that the second-order term of the
// leave-one-out shift (order D / n^2) is below the tolerance.
inline CheckResult check_ridge_loo(std::uint64_t seed = 1, Index n = 200000) {
  Rng rng = make_rng(seed, 400);
  const Index d = 5;
  LinearRegressionObjective obj{random_matrix(n, d, rng), Vector(), 0.1};
  obj.y = obj.x * random_vector(d, rng) + random_vector(n, rng, 0.5);
  const Vector theta = ridge_weighted_solution(obj.x, obj.y, obj.l2,
                                               std::vector<double>(static_cast<std::size_t>(n), 1.0));
  const InfluenceSolver solver(obj.hessian(), 0.0);
  const Matrix g = obj.per_sample_grads(theta);
  double worst = 0.0;
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (int k = 0; k < 20; ++k) {
    const Index j = pick(rng);
    const Vector predicted = predicted_loo_shift(solver.psi(g.row(j).transpose()), n);
    const Vector actual = ridge_loo_solution(obj.x, obj.y, obj.l2, j) - theta;
    worst = std::max(worst, (predicted - actual).cwiseAbs().maxCoeff());
  }
  return at_most("fisher-influence", "max |predicted - closed-form| ridge LOO shift", worst, 1e-8);
}

// Well-specified binary logistic regression: 9 features on different
// scales plus an intercept, small separate l2 penalty.
inline LogisticRegressionObjective make_logistic_problem(std::uint64_t seed, Index n = 200,
                                                         double l2 = 1e-3) {
  Rng rng = make_rng(seed, 500);
  const Index d = 10;
  LogisticRegressionObjective obj{Matrix(n, d), Vector(n), l2};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector scale(d - 1);
  for (Index k = 0; k < d - 1; ++k) scale[k] = std::pow(2.0, (static_cast<double>(k) - 4.0) / 4.0);
  Vector truth(d);
  for (Index k = 0; k < d - 1; ++k) truth[k] = 0.8 * normal(rng) / scale[k];
  truth[d - 1] = 0.3;
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d - 1; ++k) obj.x(i, k) = scale[k] * normal(rng);
    obj.x(i, d - 1) = 1.0;
    const double p = 1.0 / (1.0 + std::exp(-obj.x.row(i).dot(truth)));
    obj.y[i] = unit(rng) < p ? 1.0 : 0.0;
  }
  return obj;
}

inline FitResult fit_logistic(const LogisticRegressionObjective& obj, std::span<const double> w,
                              const Vector& init) {
  FitResult r = fit_gradient_descent(obj, w, init);
  if (!r.converged) throw ConvergenceError("logistic fit did not reach the gradient tolerance");
  return r;
}

inline CheckResult check_logistic_influence(std::uint64_t seed = 1) {
  const auto obj = make_logistic_problem(seed);
  const Index n = obj.num_samples();
  const Vector theta = fit_logistic(obj, {}, Vector::Zero(obj.num_params())).theta;
  const InfluenceSolver solver(hessian_exact(obj, theta), 0.0);
  const Matrix g = obj.per_sample_grads(theta);
  std::vector<double> predicted, actual;
  Rng rng = make_rng(seed, 501);
  for (Index j : sample_indices(n, 20, rng)) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    w[static_cast<std::size_t>(j)] = 0.0;
    const Vector refit = fit_logistic(obj, w, theta).theta - theta;
    const Vector pred = predicted_loo_shift(solver.psi(g.row(j).transpose()), n);
    for (Index k = 0; k < refit.size(); ++k) {
      predicted.push_back(pred[k]);
      actual.push_back(refit[k]);
    }
  }
  return at_least("fisher-influence", "Pearson r predicted vs retrained logistic LOO shifts",
                  pearson(predicted, actual), 0.95);
}

inline CheckResult check_bootstrap_pipeline(std::uint64_t seed = 1, int k = 300) {
  const auto obj = make_logistic_problem(seed);
  const Index n = obj.num_samples();
  const Vector theta = fit_logistic(obj, {}, Vector::Zero(obj.num_params())).theta;
  Rng rng = make_rng(seed, 502);
  const Matrix boot = bootstrap_covariance_oracle(obj, theta, k, rng);
  const Matrix fim = empirical_fim_dense(obj.per_sample_grads(theta));
  const Matrix prior = prior_cov_fisher(fim, n, default_damping(fim));
  std::vector<double> a, b;
  for (Index i = 0; i < boot.rows(); ++i) {
    a.push_back(boot(i, i));
    b.push_back(prior(i, i));
  }
  return at_least("fisher-influence", "Pearson r bootstrap vs (1/n)(F+eps I)^-1 diagonals",
                  pearson(a, b), 0.8);
}

inline std::vector<CheckResult> check_poisson_moments(std::uint64_t seed = 1, Index draws = 1000000) {
  Rng rng = make_rng(seed, 600);
  const auto w = poisson_weights(draws, rng);
  double mean = 0.0;
  for (double x : w.xi) mean += x;
  mean /= static_cast<double>(draws);
  double var = 0.0;
  for (double x : w.xi) var += (x - mean) * (x - mean);
  var /= static_cast<double>(draws - 1);
  return {at_most("data", "|mean - 1| of Poisson(1) weights", std::abs(mean - 1.0), 0.01),
          at_most("data", "|variance - 1| of Poisson(1) weights", std::abs(var - 1.0), 0.01)};
}

// SGLD on U = |w|^2 / 2 at fixed beta: the Gibbs law is N(0, beta I).
struct StationarityStats {
  Vector mean;
  Vector variance;
};

inline StationarityStats sgld_quadratic_stats(std::uint64_t seed, long samples, long stride,
                                              double eta = 1e-3, double beta = 1.0,
                                              Index dim = 2) {
  SgldConfig cfg;
  cfg.eta0 = eta;
  cfg.beta0 = beta;
  cfg.beta_min = 0.0;
  cfg.burn_in = 20000;
  cfg.sample_stride = stride;
  cfg.iterations = cfg.burn_in + samples * stride;
  Rng batch_rng = make_rng(seed, 700), noise_rng = make_rng(seed, 701);
  Vector sum = Vector::Zero(dim), sq = Vector::Zero(dim);
  long count = 0;
  const EnergyFn energy = [](const ParamVector& w, long, double, Rng&) {
    return EnergyEval{0.5 * w.squaredNorm(), w};
  };
  run_sgld(energy, ParamVector::Zero(dim), cfg, batch_rng, noise_rng,
           [&](const PosteriorSample& s) {
             sum += s.params;
             sq += s.params.cwiseAbs2();
             ++count;
           },
           false);
  StationarityStats st;
  st.mean = sum / static_cast<double>(count);
  st.variance = sq / static_cast<double>(count) - st.mean.cwiseAbs2();
  return st;
}

inline std::vector<CheckResult> check_sgld_stationarity(std::uint64_t seed = 1,
                                                        long samples = 100000, long stride = 1000) {
  const auto st = sgld_quadratic_stats(seed, samples, stride);
  double var_dev = 0.0;
  for (Index i = 0; i < st.variance.size(); ++i)
    var_dev = std::max(var_dev, std::abs(st.variance[i] - 1.0));
  return {at_most("pib-sgld", "max |posterior mean| on quadratic energy",
                  st.mean.cwiseAbs().maxCoeff(), 0.02),
          at_most("pib-sgld", "max |posterior variance - 1| on quadratic energy", var_dev, 0.05)};
}

// Softmax regression trained on separable blobs until the mean loss is
// below 1e-3; returns the model-Fisher and empirical-Fisher Hessian gaps.
struct GapReport {
  double train_loss = 0.0;
  double model_gap = 0.0;
  double empirical_gap = 0.0;
};

inline GapReport hessian_fisher_gaps(std::uint64_t seed = 1) {
  Rng rng = make_rng(seed, 800);
  const Dataset data = synthetic_blobs(120, 4, 3, 8.0, rng);
  const NetworkSpec spec{{4, 3}, Activation::linear};
  ParamVector params = init_params(spec, rng);
  OptimizerState opt({OptimizerKind::sgd, 0.5}, params.size());
  double loss = 1.0;
  for (int it = 0; it < 200000 && loss >= 1e-3; ++it) {
    const LossGrad lg = loss_and_grad(spec, params, data);
    loss = lg.loss;
    if (loss < 1e-3) break;
    optimizer_step(opt, params, lg.grad);
  }
  GapReport r;
  r.train_loss = loss_and_grad(spec, params, data).loss;
  r.model_gap = hessian_fisher_gap(spec, params, data, FisherKind::model);
  r.empirical_gap = hessian_fisher_gap(spec, params, data, FisherKind::empirical);
  return r;
}

inline std::vector<CheckResult> check_hessian_fisher_gap(std::uint64_t seed = 1) {
  const GapReport r = hessian_fisher_gaps(seed);
  return {at_most("fisher-influence", "train loss of interpolating softmax regression",
                  r.train_loss, 1e-3),
          at_most("fisher-influence", "relative Frobenius gap |H - F|/|F| (model Fisher)",
                  r.model_gap, 0.2)};
}

inline CheckResult check_log_det(std::uint64_t seed = 1) {
  Rng rng = make_rng(seed, 900);
  const Matrix g = random_matrix(50, 30, rng);
  GradientBuffer buf(50, 30);
  buf.push_rows(g);
  const double eps = 1e-3;
  const double gram = log_det_prior_cov(buf, eps, 100);
  const double dense = dense_log_det_prior_cov(g, eps, 100);
  return at_most("fisher-influence", "|Gram-path - dense log det prior covariance|",
                 std::abs(gram - dense), 1e-8);
}

}  // namespace pib::oracle
