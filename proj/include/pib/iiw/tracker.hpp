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
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/metrics_record.hpp"
#include "pib/data/batcher.hpp"
#include "pib/data/dataset.hpp"
#include "pib/data/synthetic.hpp"
#include "pib/iiw/estimator.hpp"
#include "pib/nn/gradients.hpp"
#include "pib/nn/metrics.hpp"
#include "pib/nn/optimizer.hpp"

namespace pib {

enum class Theta0Policy { init, warmup };

// Random generator streams of one run.
namespace stream {
inline constexpr std::uint64_t init = 0;
inline constexpr std::uint64_t batches = 1;
inline constexpr std::uint64_t fisher = 2;
inline constexpr std::uint64_t dropout = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t data = 5;
}  // namespace stream

// Index sets over which the T1 Fisher gradients are formed: T1 minibatches of
// size B, or T1 distinct single samples (capped at n).
inline std::vector<std::vector<Index>> draw_fisher_batches(Index n, Index t1, Index batch,
                                                           GradientMode mode, Rng& rng) {
  std::vector<std::vector<Index>> out;
  if (mode == GradientMode::per_sample) {
    for (Index i : sample_indices(n, std::min(t1, n), rng)) out.push_back({i});
    return out;
  }
  out.reserve(static_cast<std::size_t>(t1));
  for (Index t = 0; t < t1; ++t) out.push_back(sample_indices(n, std::min(batch, n), rng));
  return out;
}

struct IiwProbe {
  IiwEstimate estimate;
  double train_loss = 0.0;
  double train_acc = 0.0;
};

// Evaluates I~ = (n/T1) sum_t (delta . grad L_t(params))^2 with every
// gradient taken at `params`. Per-sample directional derivatives come from one
// forward-mode pass over the training set, so minibatch gradients reduce to
// batch means of those scalars. The same pass yields the training loss and
// accuracy.
inline IiwProbe probe_iiw(const NetworkSpec& spec, const ParamVector& params,
                          const ParamVector& delta, const Dataset& train,
                          GradientMode mode, Index t1, Index batch,
                          std::optional<double> clip, Rng& rng,
                          long t_index = 0, Index chunk = 1024) {
  const Index n = train.size();
  Vector slopes(n);
  double loss = 0.0;
  std::size_t hit = 0;
  std::vector<Index> idx;
  for (Index start = 0; start < n; start += chunk) {
    const Index stop = std::min(n, start + chunk);
    idx.resize(static_cast<std::size_t>(stop - start));
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = train.select(idx);
    const auto pass = project_sample_grads(spec, params, delta, b, clip);
    slopes.segment(start, stop - start) = pass.slopes;
    loss += pass.losses.sum();
    const auto pred = argmax_rows(pass.logits);
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == b.labels[i];
  }

  IiwAccumulator acc(ParamVector::Zero(0));
  for (const auto& set : draw_fisher_batches(n, t1, batch, mode, rng)) {
    double s = 0.0;
    for (Index i : set) s += slopes[i];
    acc.add_projection(s / static_cast<double>(set.size()));
  }
  IiwProbe out;
  out.estimate = acc.estimate(n, t_index);
  out.train_loss = loss / static_cast<double>(n);
  out.train_acc = static_cast<double>(hit) / static_cast<double>(n);
  return out;
}

struct TrackConfig {
  long iterations = 0;
  Index batch_size = 64;
  OptimizerConfig optimizer;
  double l2 = 0.0;
  double dropout = 0.0;
  std::optional<double> clip;
  Theta0Policy theta0 = Theta0Policy::warmup;
  long warmup_iterations = -1;  // -1: one epoch, ceil(n / B)
  Index fisher_samples = 512;   // T1
  GradientMode gradient_mode = GradientMode::minibatch;
  double rho = 0.9;
  Index window = 5;
  long log_interval = 0;  // 0: iterations / 50 (at least 1)

  void validate() const {
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(optimizer.lr > 0.0)) throw ConfigError("lr must be > 0");
    if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (fisher_samples < 1) throw ConfigError("fisher_samples must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (log_interval < 0) throw ConfigError("log_interval must be >= 0");
  }

  long effective_log_interval() const {
    return log_interval > 0 ? log_interval : std::max(1L, iterations / 50);
  }

  long effective_warmup(Index n) const {
    if (theta0 == Theta0Policy::init) return 0;
    if (warmup_iterations >= 0) return warmup_iterations;
    const Index b = std::min(batch_size, n);
    return static_cast<long>((n + b - 1) / b);
  }
};

struct TrackResult {
  ParamVector params;
  ParamVector theta0;
  std::vector<IiwEstimate> estimates;
  std::vector<MetricsRecord> metrics;
  bool diverged = false;
  std::string diagnostic;
};

// Plain (optionally l2/dropout regularized) minibatch gradient at `params`.
inline Vector training_gradient(const NetworkSpec& spec, const ParamVector& params,
                                const Batch& batch, const TrackConfig& cfg,
                                Rng& dropout_rng) {
  LossOptions opt;
  opt.clip = cfg.clip;
  opt.dropout_rate = cfg.dropout;
  opt.rng = &dropout_rng;
  Vector g = loss_and_grad(spec, params, batch, opt).grad;
  if (cfg.l2 > 0.0) g += cfg.l2 * params;
  return g;
}

// Trains with SGD/Adam while logging the approximate information in weights.
// theta0 is the initialization or the weights after a warmup phase; at every
// logging step the displacement of the quadratic running average from
// theta0 is contracted with T1 fresh gradients at the current weights.
inline TrackResult track_iiw_during_training(
    const NetworkSpec& spec, const Dataset& train, const Dataset* test,
    const TrackConfig& cfg, std::uint64_t seed,
    const std::function<void(const MetricsRecord&)>& on_record = {}) {
  spec.validate();
  cfg.validate();
  if (train.num_classes > spec.output_dim())
    throw ConfigError("network has fewer outputs than dataset classes");

  Rng init_rng = make_rng(seed, stream::init);
  Rng fisher_rng = make_rng(seed, stream::fisher);
  Rng dropout_rng = make_rng(seed, stream::dropout);
  MinibatchSampler batches(train.size(), cfg.batch_size, make_rng(seed, stream::batches));

  TrackResult res;
  ParamVector params = init_params(spec, init_rng);
  OptimizerState opt(cfg.optimizer, params.size());

  const long warmup = cfg.effective_warmup(train.size());
  try {
    for (long t = 0; t < warmup; ++t)
      optimizer_step(opt, params,
                     training_gradient(spec, params, train.select(batches.next()), cfg,
                                       dropout_rng));
  } catch (const NumericError& e) {
    res.params = params;
    res.theta0 = params;
    res.diverged = true;
    res.diagnostic = std::string("warmup diverged: ") + e.what();
    return res;
  }
  res.theta0 = params;

  MovingAverageState avg(cfg.rho, cfg.window, res.theta0);
  const long every = cfg.effective_log_interval();
  for (long t = 1; t <= cfg.iterations; ++t) {
    try {
      optimizer_step(opt, params,
                     training_gradient(spec, params, train.select(batches.next()), cfg,
                                       dropout_rng));
      if (!params.allFinite()) throw NumericError("non-finite weights after update");
      update_moving_average(avg, params);
      if (t % every != 0 && t != cfg.iterations) continue;

      const ParamVector delta = iiw_displacement(avg, params, res.theta0);
      const auto probe = probe_iiw(spec, params, delta, train, cfg.gradient_mode,
                                   cfg.fisher_samples, cfg.batch_size, cfg.clip,
                                   fisher_rng, t);
      if (!std::isfinite(probe.train_loss) || !std::isfinite(probe.estimate.value))
        throw NumericError("non-finite training loss");
      MetricsRecord rec;
      rec.iter = t;
      rec.train_loss = probe.train_loss;
      rec.train_acc = probe.train_acc;
      if (test) rec.test_acc = accuracy(spec, params, *test);
      rec.iiw = probe.estimate.value;
      rec.lr = cfg.optimizer.lr;
      res.estimates.push_back(probe.estimate);
      res.metrics.push_back(rec);
      if (on_record) on_record(rec);
    } catch (const NumericError& e) {
      res.diverged = true;
      res.diagnostic = "diverged at iteration " + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  res.params = std::move(params);
  return res;
}

}  // namespace pib
