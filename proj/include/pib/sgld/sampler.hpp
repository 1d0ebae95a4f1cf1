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
#include <random>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/nn/gradients.hpp"
#include "pib/nn/loss.hpp"
#include "pib/sgld/schedule.hpp"

namespace pib {

struct SgldConfig {
  double eta0 = 1e-2;
  double beta0 = 1e-4;
  DecayKind decay_eta = DecayKind::constant;
  DecayKind decay_beta = DecayKind::constant;
  long horizon = 0;        // 0: iterations
  double eta_min = 0.0;
  double beta_min = 1e-8;
  long burn_in = 0;
  long sample_stride = 1;
  Index batch_size = 64;
  long iterations = 0;
  // Optional early stop once the running posterior mean changes by less
  // than `stability_tol` (relative) over `stability_window` samples.
  long stability_window = 0;
  double stability_tol = 1e-4;

  void validate() const {
    if (!(eta0 > 0.0)) throw ConfigError("eta0 must be > 0");
    if (!(beta0 > 0.0)) throw ConfigError("beta0 must be > 0");
    if (beta_min < 0.0 || eta_min < 0.0) throw ConfigError("schedule floors must be >= 0");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (burn_in < 0 || (iterations > 0 && burn_in >= iterations))
      throw ConfigError("burn_in must lie in [0, iterations)");
    if (sample_stride < 1) throw ConfigError("sample_stride must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (horizon < 0 || stability_window < 0) throw ConfigError("horizon and window must be >= 0");
  }

  long effective_horizon() const { return horizon > 0 ? horizon : std::max(iterations, 1L); }
  double eta_at(long t) const {
    return schedule(eta0, t, effective_horizon(), decay_eta, eta_min);
  }
  double beta_at(long t) const {
    return schedule(beta0, t, effective_horizon(), decay_beta, beta_min);
  }
};

// w <- w - eta g + sqrt(2 eta beta) eps, eps ~ N(0, I). With beta = 0 no
// random numbers are drawn and the update is the plain SGD step.
inline void sgld_step(ParamVector& params, const Vector& grad, double eta, double beta, Rng& rng) {
  if (grad.size() != params.size()) throw ShapeError("gradient length differs from parameter length");
  params -= eta * grad;
  if (beta > 0.0) {
    const double scale = std::sqrt(2.0 * eta * beta);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < params.size(); ++i) params[i] += scale * normal(rng);
  }
}

struct PosteriorSample {
  ParamVector params;
  long iter = 0;
  double energy = 0.0;
};

// Stability monitor over the running mean of collected samples.
class StabilityMonitor {
 public:
  StabilityMonitor(long window, double tol) : window_(window), tol_(tol) {}

  // Returns true once the relative change of the running mean over the last
  // `window` samples falls below the tolerance.
  bool add(const ParamVector& sample) {
    if (window_ <= 0) return false;
    ++count_;
    if (mean_.size() == 0) {
      mean_ = sample;
    } else {
      mean_ += (sample - mean_) / static_cast<double>(count_);
    }
    if (count_ % window_ != 0) return false;
    const bool stable = anchor_.size() > 0 &&
                        (mean_ - anchor_).norm() <= tol_ * std::max(mean_.norm(), 1e-300);
    anchor_ = mean_;
    return stable;
  }

 private:
  long window_;
  double tol_;
  long count_ = 0;
  ParamVector mean_;
  ParamVector anchor_;
};

// Energy U(w) and its (stochastic) gradient at step t.
struct EnergyEval {
  double energy = 0.0;
  Vector grad;
};
using EnergyFn = std::function<EnergyEval(const ParamVector& w, long t, double beta, Rng& rng)>;

struct SgldRun {
  std::vector<PosteriorSample> samples;
  ParamVector last;
  long iterations_run = 0;
};

// Runs the chain w_t = w_{t-1} - eta_t grad U + sqrt(2 eta_t beta_t) eps for
// cfg.iterations steps from `init`, keeping every sample_stride-th iterate
// after burn_in. `batch_rng` feeds the energy, `noise_rng` the injected noise.
inline SgldRun run_sgld(const EnergyFn& energy, const ParamVector& init, const SgldConfig& cfg,
                        Rng& batch_rng, Rng& noise_rng,
                        const std::function<void(const PosteriorSample&)>& on_sample = {},
                        bool keep_samples = true) {
  cfg.validate();
  SgldRun run;
  run.last = init;
  StabilityMonitor monitor(cfg.stability_window, cfg.stability_tol);
  for (long t = 1; t <= cfg.iterations; ++t) {
    const double eta = cfg.eta_at(t - 1);
    const double beta = cfg.beta_at(t - 1);
    const EnergyEval e = energy(run.last, t, beta, batch_rng);
    if (!std::isfinite(e.energy) || !e.grad.allFinite())
      throw NumericError("non-finite energy at iteration " + std::to_string(t));
    sgld_step(run.last, e.grad, eta, beta, noise_rng);
    run.iterations_run = t;
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.sample_stride == 0) {
      PosteriorSample s{run.last, t, e.energy};
      if (on_sample) on_sample(s);
      const bool stop = monitor.add(s.params);
      if (keep_samples) run.samples.push_back(std::move(s));
      if (stop) break;
    }
  }
  return run;
}

// Mean of the per-sample softmax outputs on `inputs` (B x C).
inline Matrix posterior_predict(const std::vector<PosteriorSample>& samples,
                                const NetworkSpec& spec, const RowMatrix& inputs) {
  if (samples.empty()) throw ConfigError("posterior prediction needs at least one sample");
  Matrix mean = softmax(forward(spec, samples.front().params, inputs));
  for (std::size_t k = 1; k < samples.size(); ++k)
    mean += softmax(forward(spec, samples[k].params, inputs));
  return mean / static_cast<double>(samples.size());
}

}  // namespace pib
