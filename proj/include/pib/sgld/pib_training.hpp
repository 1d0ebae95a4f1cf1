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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/metrics_record.hpp"
#include "pib/core/types.hpp"
#include "pib/data/batcher.hpp"
#include "pib/data/dataset.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/iiw/estimator.hpp"
#include "pib/iiw/tracker.hpp"
#include "pib/nn/metrics.hpp"
#include "pib/nn/network.hpp"
#include "pib/nn/optimizer.hpp"
#include "pib/sgld/checkpoint.hpp"
#include "pib/sgld/prior.hpp"
#include "pib/sgld/sampler.hpp"

namespace pib {

struct PibConfig {
  SgldConfig sgld;
  LikelihoodScaling scaling = LikelihoodScaling::batch_squared;
  OptimizerConfig warmup_optimizer{OptimizerKind::sgd, 1e-2};
  long warmup_iterations = -1;          // -1: one epoch
  Index prior_fisher_samples = 256;     // gradients defining F at theta0
  GradientMode prior_mode = GradientMode::per_sample;
  double damping = -1.0;                // < 0: 1e-8 * mean diag F
  long refresh_interval = 0;            // 0: F is frozen
  std::optional<double> clip;
  Index fisher_samples = 512;           // T1 of the IIW diagnostic
  GradientMode gradient_mode = GradientMode::minibatch;
  double rho = 0.9;
  Index window = 5;
  long log_interval = 0;                // 0: iterations / 50
  bool keep_samples = true;

  void validate() const {
    sgld.validate();
    if (!(warmup_optimizer.lr > 0.0)) throw ConfigError("warmup lr must be > 0");
    if (prior_fisher_samples < 1) throw ConfigError("prior_fisher_samples must be >= 1");
    if (refresh_interval < 0) throw ConfigError("refresh_interval must be >= 0");
    if (fisher_samples < 1) throw ConfigError("fisher_samples must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (log_interval < 0) throw ConfigError("log_interval must be >= 0");
  }

  long effective_log_interval() const {
    return log_interval > 0 ? log_interval : std::max(1L, sgld.iterations / 50);
  }
  long effective_warmup(Index n) const {
    if (warmup_iterations >= 0) return warmup_iterations;
    const Index b = std::min(sgld.batch_size, n);
    return static_cast<long>((n + b - 1) / b);
  }
};

struct PibResult {
  ParamVector params;
  ParamVector theta0;
  std::vector<PosteriorSample> samples;
  std::vector<MetricsRecord> metrics;
  std::vector<IiwEstimate> estimates;
  double damping = 0.0;
  double log_det_prior = 0.0;  // constant; never enters gradients
  Checkpoint last_stable;
  bool diverged = false;
  std::string diagnostic;
};

// Builds the prior at theta0: T gradients of the unregularized loss at theta0
// with the configured damping.
inline PriorSpec build_prior(const NetworkSpec& spec, const ParamVector& theta0,
                             const Dataset& train, const PibConfig& cfg, Rng& rng) {
  PriorSpec prior;
  prior.theta0 = theta0;
  prior.n = train.size();
  prior.refresh_interval = cfg.refresh_interval;
  const auto sets = draw_fisher_batches(train.size(), cfg.prior_fisher_samples,
                                        cfg.sgld.batch_size, cfg.prior_mode, rng);
  auto buf = fisher_buffer_at(spec, theta0, train, sets, cfg.prior_mode, cfg.clip);
  prior.damping = cfg.damping >= 0.0 ? cfg.damping : default_damping(*buf);
  if (!(prior.damping > 0.0)) prior.damping = 1e-12;
  prior.fim = std::move(buf);
  return prior;
}

// Warmup to theta0, prior construction at theta0, then SGLD on
// U(w) = s L_B(w) + beta (w - theta0)^T Sigma0^{-1} (w - theta0).
inline PibResult run_pib_training(const NetworkSpec& spec, const Dataset& train,
                                  const Dataset* test, const PibConfig& cfg, std::uint64_t seed,
                                  const std::function<void(const MetricsRecord&)>& on_record = {}) {
  spec.validate();
  cfg.validate();
  if (train.num_classes > spec.output_dim())
    throw ConfigError("network has fewer outputs than dataset classes");

  Rng init_rng = make_rng(seed, stream::init);
  Rng fisher_rng = make_rng(seed, stream::fisher);
  Rng noise_rng = make_rng(seed, stream::noise);
  MinibatchSampler batches(train.size(), cfg.sgld.batch_size, make_rng(seed, stream::batches));
  const Index n = train.size();

  PibResult res;
  ParamVector params = init_params(spec, init_rng);
  OptimizerState opt(cfg.warmup_optimizer, params.size());
  try {
    const long warmup = cfg.effective_warmup(n);
    for (long t = 0; t < warmup; ++t) {
      LossOptions lo;
      lo.clip = cfg.clip;
      optimizer_step(opt, params, loss_and_grad(spec, params, train.select(batches.next()), lo).grad);
    }
    if (!params.allFinite()) throw NumericError("non-finite weights after warmup");
  } catch (const NumericError& e) {
    res.params = res.theta0 = params;
    res.last_stable = {params, 0};
    res.diverged = true;
    res.diagnostic = std::string("warmup diverged: ") + e.what();
    return res;
  }
  res.theta0 = params;
  res.last_stable = {params, 0};

  PriorSpec prior = build_prior(spec, res.theta0, train, cfg, fisher_rng);
  res.damping = prior.damping;
  res.log_det_prior = log_det_prior_cov(*prior.fim, prior.damping, n);

  const double scale = likelihood_scale(cfg.scaling, std::min(cfg.sgld.batch_size, n), n);
  MovingAverageState avg(cfg.rho, cfg.window, res.theta0);
  const long every = cfg.effective_log_interval();

  auto energy = [&](const ParamVector& w, long t, double beta) {
    if (prior.refresh_interval > 0 && t > 1 && (t - 1) % prior.refresh_interval == 0)
      prior = build_prior(spec, res.theta0, train, cfg, fisher_rng);
    const Batch b = train.select(batches.next());
    LossOptions lo;
    lo.clip = cfg.clip;
    LossGrad lg = loss_and_grad(spec, w, b, lo);
    EnergyEval e;
    e.grad = scale * lg.grad;
    e.energy = scale * lg.loss;
    if (beta > 0.0) {
      const Vector pull = prior_neg_log_grad(w, prior);
      e.grad += beta * pull;
      e.energy += beta * 0.5 * (w - prior.theta0).dot(pull);
    }
    return e;
  };

  StabilityMonitor monitor(cfg.sgld.stability_window, cfg.sgld.stability_tol);
  bool stop = false;
  auto on_step = [&](const PosteriorSample& s) {
    const long t = s.iter;
    update_moving_average(avg, s.params);
    if (t > cfg.sgld.burn_in && (t - cfg.sgld.burn_in) % cfg.sgld.sample_stride == 0) {
      if (cfg.keep_samples) res.samples.push_back(s);
      stop = monitor.add(s.params);
    }
    if (t % every != 0 && t != cfg.sgld.iterations && !stop) return;
    const ParamVector delta = iiw_displacement(avg, s.params, res.theta0);
    const auto probe = probe_iiw(spec, s.params, delta, train, cfg.gradient_mode,
                                 cfg.fisher_samples, cfg.sgld.batch_size, cfg.clip, fisher_rng, t);
    const double beta = cfg.sgld.beta_at(t - 1);
    MetricsRecord rec;
    rec.iter = t;
    rec.train_loss = probe.train_loss;
    rec.train_acc = probe.train_acc;
    if (test) rec.test_acc = accuracy(spec, s.params, *test);
    rec.iiw = probe.estimate.value;
    rec.lr = cfg.sgld.eta_at(t - 1);
    rec.temperature = beta;
    rec.energy = scale * probe.train_loss + beta * prior_quadratic(s.params, prior);
    if (!std::isfinite(rec.energy) || !std::isfinite(rec.iiw))
      throw NumericError("non-finite energy at iteration " + std::to_string(t));
    res.estimates.push_back(probe.estimate);
    res.metrics.push_back(rec);
    res.last_stable = {s.params, static_cast<std::uint64_t>(t)};
    if (on_record) on_record(rec);
  };

  ParamVector w = params;
  try {
    for (long t = 1; t <= cfg.sgld.iterations && !stop; ++t) {
      const double eta = cfg.sgld.eta_at(t - 1);
      const double beta = cfg.sgld.beta_at(t - 1);
      const EnergyEval e = energy(w, t, beta);
      if (!std::isfinite(e.energy) || !e.grad.allFinite())
        throw NumericError("non-finite energy at iteration " + std::to_string(t));
      sgld_step(w, e.grad, eta, beta, noise_rng);
      if (!w.allFinite()) throw NumericError("non-finite weights at iteration " + std::to_string(t));
      on_step(PosteriorSample{w, t, e.energy});
    }
  } catch (const NumericError& e) {
    res.diverged = true;
    res.diagnostic = e.what();
  }
  res.params = std::move(w);
  return res;
}

// Accuracy of the posterior-averaged prediction.
inline double posterior_accuracy(const std::vector<PosteriorSample>& samples,
                                 const NetworkSpec& spec, const Dataset& data) {
  return accuracy_of(posterior_predict(samples, spec, data.inputs), data.labels);
}

}  // namespace pib
