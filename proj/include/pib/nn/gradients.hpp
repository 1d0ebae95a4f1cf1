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

#include <optional>
#include <span>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"
#include "pib/data/dataset.hpp"
#include "pib/nn/dropout.hpp"
#include "pib/nn/loss.hpp"
#include "pib/nn/network.hpp"

namespace pib {

struct LossOptions {
  // Cap on each per-sample loss; capped samples contribute zero gradient.
  std::optional<double> clip;
  // Per-sample multipliers on the loss (empty = all ones).
  std::span<const double> weights;
  // Inverted dropout on every hidden layer; requires `rng` when > 0.
  double dropout_rate = 0.0;
  Rng* rng = nullptr;
};

namespace detail {

// Feature-major intermediate values of one forward pass: columns are samples.
struct ForwardPass {
  std::vector<Matrix> pre;   // z_l, l = 0..L-1
  std::vector<Matrix> post;  // post[0] = inputs^T, post[L] = logits
  std::vector<Matrix> mask;  // scaled dropout masks of hidden layers
};

inline ForwardPass run_forward(const NetworkSpec& spec, const ParamVector& params,
                               const RowMatrix& inputs, double dropout_rate = 0.0,
                               Rng* rng = nullptr) {
  spec.validate();
  spec.check_params(params);
  if (inputs.cols() != spec.input_dim())
    throw ShapeError("inputs have " + std::to_string(inputs.cols()) +
                     " columns, network expects " +
                     std::to_string(spec.input_dim()));
  if (dropout_rate > 0.0 && rng == nullptr)
    throw ConfigError("dropout requires a random generator");

  ForwardPass fp;
  const Index L = spec.num_layers();
  fp.post.reserve(static_cast<std::size_t>(L) + 1);
  fp.post.emplace_back(inputs.transpose());
  for (Index l = 0; l < L; ++l) {
    Matrix z = layer_weights(spec, params, l) * fp.post.back();
    z.colwise() += layer_bias(spec, params, l);
    Matrix a = z;
    if (l + 1 < L) {
      activate_inplace(spec.activation, a);
      if (dropout_rate > 0.0) {
        fp.mask.push_back(dropout_mask(a.rows(), a.cols(), dropout_rate, *rng));
        a.array() *= fp.mask.back().array();
      }
    }
    if (!a.allFinite())
      throw NumericError("non-finite layer output", static_cast<int>(l));
    fp.pre.push_back(std::move(z));
    fp.post.push_back(std::move(a));
  }
  return fp;
}

// Backpropagates dL/dlogits (C x B) and returns dL/dz_l for every layer.
inline std::vector<Matrix> backward_deltas(const NetworkSpec& spec,
                                           const ParamVector& params,
                                           const ForwardPass& fp,
                                           Matrix dlogits) {
  const Index L = spec.num_layers();
  std::vector<Matrix> delta(static_cast<std::size_t>(L));
  delta[static_cast<std::size_t>(L - 1)] = std::move(dlogits);
  for (Index l = L - 1; l > 0; --l) {
    const auto k = static_cast<std::size_t>(l);
    Matrix d = layer_weights(spec, params, l).transpose() * delta[k];
    if (!fp.mask.empty()) d.array() *= fp.mask[k - 1].array();
    d.array() *= activation_slope(spec.activation, fp.pre[k - 1]).array();
    delta[k - 1] = std::move(d);
  }
  return delta;
}

inline Vector gradient_from_deltas(const NetworkSpec& spec, const ForwardPass& fp,
                                   const std::vector<Matrix>& delta) {
  Vector grad(spec.num_params());
  for (Index l = 0; l < spec.num_layers(); ++l) {
    const auto k = static_cast<std::size_t>(l);
    const Index off = spec.weight_offset(l);
    const Index nw = spec.fan_in(l) * spec.fan_out(l);
    Eigen::Map<Matrix>(grad.data() + off, spec.fan_out(l), spec.fan_in(l)).noalias() =
        delta[k] * fp.post[k].transpose();
    grad.segment(off + nw, spec.fan_out(l)) = delta[k].rowwise().sum();
  }
  return grad;
}

// dL/dlogits of the per-sample cross-entropy: softmax(z) - onehot(y).
inline Matrix softmax_residual(const Matrix& logits, std::span<const int> labels) {
  Matrix r = softmax_columns(logits);
  for (Index j = 0; j < r.cols(); ++j) r(labels[static_cast<std::size_t>(j)], j) -= 1.0;
  return r;
}

inline void check_batch(const NetworkSpec& spec, const Batch& batch) {
  if (batch.size() < 1) throw ConfigError("empty batch");
  if (batch.inputs.rows() != batch.size())
    throw ShapeError("batch inputs/labels row mismatch");
  if (spec.output_dim() < 2) throw ConfigError("cross-entropy needs C >= 2");
  check_labels(batch.labels, batch.size(), spec.output_dim());
}

}  // namespace detail

// Logits (B x C) of the network on row-major inputs (B x input_dim).
inline Matrix forward(const NetworkSpec& spec, const ParamVector& params,
                      const RowMatrix& inputs) {
  return detail::run_forward(spec, params, inputs).post.back().transpose();
}

// Mean (optionally weighted and clipped) cross-entropy of the batch and its
// exact gradient with respect to all parameters.
inline LossGrad loss_and_grad(const NetworkSpec& spec, const ParamVector& params,
                              const Batch& batch, const LossOptions& opt = {}) {
  detail::check_batch(spec, batch);
  if (!opt.weights.empty() &&
      static_cast<Index>(opt.weights.size()) != batch.size())
    throw ShapeError("loss weights length differs from batch size");
  if (opt.clip && !(*opt.clip > 0.0))
    throw ConfigError("loss clip bound must be > 0");

  const auto fp = detail::run_forward(spec, params, batch.inputs,
                                      opt.dropout_rate, opt.rng);
  const Matrix& logits = fp.post.back();
  const Vector losses = detail::sample_cross_entropy(logits, batch.labels);
  Matrix dlogits = detail::softmax_residual(logits, batch.labels);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (Index j = 0; j < batch.size(); ++j) {
    const double w = opt.weights.empty() ? 1.0 : opt.weights[static_cast<std::size_t>(j)];
    double lj = losses[j];
    double coef = w * inv_b;
    if (opt.clip && lj > *opt.clip) {
      lj = *opt.clip;
      coef = 0.0;
    }
    loss += w * lj;
    dlogits.col(j) *= coef;
  }
  loss *= inv_b;
  if (!std::isfinite(loss))
    throw NumericError("non-finite loss", static_cast<int>(spec.num_layers() - 1));

  const auto delta = detail::backward_deltas(spec, params, fp, std::move(dlogits));
  return {loss, detail::gradient_from_deltas(spec, fp, delta)};
}

// B x D matrix whose row i is the gradient of sample i's (unweighted) loss.
inline Matrix per_sample_grads(const NetworkSpec& spec, const ParamVector& params,
                               const Batch& batch,
                               std::optional<double> clip = std::nullopt) {
  detail::check_batch(spec, batch);
  const auto fp = detail::run_forward(spec, params, batch.inputs);
  Matrix dlogits = detail::softmax_residual(fp.post.back(), batch.labels);
  if (clip) {
    const Vector losses = detail::sample_cross_entropy(fp.post.back(), batch.labels);
    for (Index j = 0; j < batch.size(); ++j)
      if (losses[j] > *clip) dlogits.col(j).setZero();
  }
  const auto delta = detail::backward_deltas(spec, params, fp, std::move(dlogits));

  Matrix g(spec.num_params(), batch.size());
  for (Index j = 0; j < batch.size(); ++j) {
    for (Index l = 0; l < spec.num_layers(); ++l) {
      const auto k = static_cast<std::size_t>(l);
      const Index off = spec.weight_offset(l);
      const Index nw = spec.fan_in(l) * spec.fan_out(l);
      Eigen::Map<Matrix>(g.col(j).data() + off, spec.fan_out(l), spec.fan_in(l))
          .noalias() = delta[k].col(j) * fp.post[k].col(j).transpose();
      g.col(j).segment(off + nw, spec.fan_out(l)) = delta[k].col(j);
    }
  }
  return g.transpose();
}

// Per-sample losses, logits and directional derivatives
// slope_i = grad(loss_i) . direction, from a single forward-mode pass; never
// forms per-sample gradients.
struct ProjectedPass {
  Vector losses;
  Vector slopes;
  Matrix logits;  // B x C
};

inline ProjectedPass project_sample_grads(const NetworkSpec& spec,
                                          const ParamVector& params,
                                          const ParamVector& direction,
                                          const Batch& batch,
                                          std::optional<double> clip = std::nullopt) {
  detail::check_batch(spec, batch);
  spec.check_params(direction);
  const auto fp = detail::run_forward(spec, params, batch.inputs);
  const Index L = spec.num_layers();

  Matrix tangent;  // d a_l / d eps, zero for the inputs
  for (Index l = 0; l < L; ++l) {
    const auto k = static_cast<std::size_t>(l);
    Matrix dz = layer_weights(spec, direction, l) * fp.post[k];
    dz.colwise() += layer_bias(spec, direction, l);
    if (l > 0) dz.noalias() += layer_weights(spec, params, l) * tangent;
    if (l + 1 < L)
      dz.array() *= detail::activation_slope(spec.activation, fp.pre[k]).array();
    tangent = std::move(dz);
  }

  const Matrix& logits = fp.post.back();
  ProjectedPass out;
  out.losses = detail::sample_cross_entropy(logits, batch.labels);
  const Matrix resid = detail::softmax_residual(logits, batch.labels);
  out.slopes = resid.cwiseProduct(tangent).colwise().sum().transpose();
  if (clip)
    for (Index j = 0; j < batch.size(); ++j)
      if (out.losses[j] > *clip) {
        out.losses[j] = *clip;
        out.slopes[j] = 0.0;
      }
  out.logits = logits.transpose();
  return out;
}

}  // namespace pib
