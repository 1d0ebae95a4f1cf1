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
#include <string>
#include <string_view>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

enum class Activation { linear, tanh, relu, sigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::linear;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

// Dense feed-forward architecture. The activation is applied to every hidden
// layer; the last layer emits raw logits. Parameters are laid out layer by
// layer as W_l (out x in, column-major) followed by b_l (out).
struct NetworkSpec {
  std::vector<Index> layer_sizes;
  Activation activation = Activation::relu;

  Index num_layers() const {
    return static_cast<Index>(layer_sizes.size()) - 1;
  }
  Index input_dim() const { return layer_sizes.front(); }
  Index output_dim() const { return layer_sizes.back(); }
  Index fan_in(Index l) const { return layer_sizes[static_cast<std::size_t>(l)]; }
  Index fan_out(Index l) const {
    return layer_sizes[static_cast<std::size_t>(l) + 1];
  }

  Index num_params() const {
    Index d = 0;
    for (Index l = 0; l < num_layers(); ++l) d += (fan_in(l) + 1) * fan_out(l);
    return d;
  }

  // Offset of W_l inside the flat parameter vector; b_l follows at
  // offset + fan_in(l) * fan_out(l).
  Index weight_offset(Index l) const {
    Index off = 0;
    for (Index k = 0; k < l; ++k) off += (fan_in(k) + 1) * fan_out(k);
    return off;
  }

  void validate() const {
    if (layer_sizes.size() < 2)
      throw ConfigError("network needs at least 2 layer sizes");
    for (Index s : layer_sizes)
      if (s < 1) throw ConfigError("network layer sizes must be >= 1");
  }

  void check_params(const ParamVector& params) const {
    if (params.size() != num_params())
      throw ShapeError("parameter vector has length " +
                       std::to_string(params.size()) + ", network expects " +
                       std::to_string(num_params()));
  }
};

inline Eigen::Map<const Matrix> layer_weights(const NetworkSpec& spec,
                                              const ParamVector& params,
                                              Index l) {
  return {params.data() + spec.weight_offset(l), spec.fan_out(l),
          spec.fan_in(l)};
}

inline Eigen::Map<const Vector> layer_bias(const NetworkSpec& spec,
                                           const ParamVector& params,
                                           Index l) {
  return {params.data() + spec.weight_offset(l) + spec.fan_in(l) * spec.fan_out(l),
          spec.fan_out(l)};
}

// Uniform on +-sqrt(6 / (fan_in + fan_out)) for weights, zero biases.
inline ParamVector init_params(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  ParamVector p = ParamVector::Zero(spec.num_params());
  for (Index l = 0; l < spec.num_layers(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(spec.fan_in(l) + spec.fan_out(l)));
    std::uniform_real_distribution<double> u(-bound, bound);
    const Index off = spec.weight_offset(l);
    for (Index k = 0; k < spec.fan_in(l) * spec.fan_out(l); ++k)
      p[off + k] = u(rng);
  }
  return p;
}

namespace detail {

inline void activate_inplace(Activation a, Matrix& z) {
  switch (a) {
    case Activation::linear: break;
    case Activation::tanh: z = z.array().tanh(); break;
    case Activation::relu: z = z.array().max(0.0); break;
    case Activation::sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse();
      break;
  }
}

// Elementwise derivative of the activation at pre-activation values z.
// ReLU'(0) = 0.
inline Matrix activation_slope(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::linear: return Matrix::Ones(z.rows(), z.cols());
    case Activation::tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: {
      const Eigen::ArrayXXd s = (1.0 + (-z.array()).exp()).inverse();
      return (s * (1.0 - s)).matrix();
    }
  }
  return {};
}

}  // namespace detail

}  // namespace pib
