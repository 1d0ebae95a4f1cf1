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

#include <memory>
#include <string_view>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/dataset.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/iiw/gradient_buffer.hpp"
#include "pib/nn/gradients.hpp"

namespace pib {

// Gaussian prior N(theta0, Sigma0) with Sigma0^{-1} = n (F + damping I) and F
// the implicit empirical Fisher of `fim`. A null or empty buffer leaves the
// isotropic damping term alone.
struct PriorSpec {
  ParamVector theta0;
  std::shared_ptr<const GradientBuffer> fim;
  double damping = 0.0;
  Index n = 0;
  long refresh_interval = 0;  // 0: never

  bool initialized() const { return theta0.size() > 0 && n > 0; }
  bool has_fim() const { return fim && !fim->empty(); }
};

namespace detail {

inline void check_prior(const PriorSpec& prior, Index dim) {
  if (!prior.initialized()) throw ConfigError("prior is not initialized");
  if (prior.theta0.size() != dim) throw ShapeError("prior mean length mismatch");
  if (prior.has_fim() && prior.fim->dim() != dim) throw ShapeError("prior Fisher dimension mismatch");
  if (!(prior.damping > 0.0) && !prior.has_fim())
    throw ConfigError("prior without Fisher gradients needs damping > 0");
}

// n (F + damping I) v.
inline Vector prior_precision_product(const PriorSpec& prior, const Vector& v) {
  Vector out = prior.damping * v;
  if (prior.has_fim()) out += fim_vector_product(*prior.fim, v);
  return static_cast<double>(prior.n) * out;
}

}  // namespace detail

// Gradient of (w - theta0)^T Sigma0^{-1} (w - theta0): 2 n (F + eps I)(w - theta0).
inline Vector prior_neg_log_grad(const ParamVector& params, const PriorSpec& prior) {
  detail::check_prior(prior, params.size());
  return 2.0 * detail::prior_precision_product(prior, params - prior.theta0);
}

// (w - theta0)^T Sigma0^{-1} (w - theta0).
inline double prior_quadratic(const ParamVector& params, const PriorSpec& prior) {
  detail::check_prior(prior, params.size());
  const Vector v = params - prior.theta0;
  return v.dot(detail::prior_precision_product(prior, v));
}

// Fills a buffer of T1 gradients of the unregularized loss at theta0.
inline std::shared_ptr<GradientBuffer> fisher_buffer_at(const NetworkSpec& spec,
                                                        const ParamVector& theta0,
                                                        const Dataset& train,
                                                        const std::vector<std::vector<Index>>& sets,
                                                        GradientMode mode,
                                                        std::optional<double> clip) {
  auto buf = std::make_shared<GradientBuffer>(static_cast<Index>(std::max<std::size_t>(sets.size(), 1)),
                                              spec.num_params(), mode);
  for (const auto& set : sets) {
    LossOptions opt;
    opt.clip = clip;
    buf->push(loss_and_grad(spec, theta0, train.select(set), opt).grad);
  }
  return buf;
}

// Data-term weighting of the energy gradient. `batch_squared` multiplies the batch
// sum by B/n (B^2/n times the batch mean); `standard` is the batch mean.
enum class LikelihoodScaling { batch_squared, standard };

inline std::string_view to_string(LikelihoodScaling s) {
  return s == LikelihoodScaling::batch_squared ? "batch_squared" : "standard";
}

inline LikelihoodScaling parse_likelihood_scaling(std::string_view s) {
  if (s == "batch_squared") return LikelihoodScaling::batch_squared;
  if (s == "standard") return LikelihoodScaling::standard;
  throw ConfigError("unknown likelihood scaling '" + std::string(s) + "'");
}

inline double likelihood_scale(LikelihoodScaling s, Index batch, Index n) {
  if (s == LikelihoodScaling::standard) return 1.0;
  const double b = static_cast<double>(batch);
  return b * b / static_cast<double>(n);
}

// Minibatch gradient of U = (scaled) data loss - beta log p(w).
inline Vector energy_grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch,
                          const PriorSpec& prior, double beta, Index n,
                          LikelihoodScaling scaling = LikelihoodScaling::batch_squared,
                          std::optional<double> clip = std::nullopt) {
  if (beta < 0.0) throw ConfigError("temperature must be >= 0");
  LossOptions opt;
  opt.clip = clip;
  Vector g = likelihood_scale(scaling, batch.size(), n) *
             loss_and_grad(spec, params, batch, opt).grad;
  if (beta > 0.0) g += beta * prior_neg_log_grad(params, prior);
  return g;
}

}  // namespace pib
