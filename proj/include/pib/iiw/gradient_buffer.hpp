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

#include <string>
#include <string_view>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/types.hpp"

namespace pib {

// Minibatch gradients (dL_t over B samples) or single-sample gradients
// (dl_i). The empirical FIM built from minibatch gradients is smaller by
// roughly a factor B.
enum class GradientMode { minibatch, per_sample };

inline std::string_view to_string(GradientMode m) {
  return m == GradientMode::minibatch ? "minibatch" : "per_sample";
}

inline GradientMode parse_gradient_mode(std::string_view s) {
  if (s == "minibatch") return GradientMode::minibatch;
  if (s == "per_sample") return GradientMode::per_sample;
  throw ConfigError("unknown gradient mode '" + std::string(s) + "'");
}

// Ring buffer of up to `capacity` gradients of equal length. It is the
// implicit rank-T empirical Fisher F = (1/T) sum_t g_t g_t^T.
class GradientBuffer {
 public:
  GradientBuffer() = default;
  GradientBuffer(Index capacity, Index dim,
                 GradientMode mode = GradientMode::minibatch)
      : capacity_(capacity), dim_(dim), mode_(mode) {
    if (capacity < 1) throw ConfigError("gradient buffer capacity must be >= 1");
    if (dim < 1) throw ConfigError("gradient buffer dimension must be >= 1");
    grads_.reserve(static_cast<std::size_t>(capacity));
  }

  void push(const Vector& g) {
    if (g.size() != dim_)
      throw ShapeError("gradient of length " + std::to_string(g.size()) +
                       " pushed into buffer of dimension " + std::to_string(dim_));
    if (size() < capacity_) {
      grads_.push_back(g);
    } else {
      grads_[static_cast<std::size_t>(head_)] = g;
      head_ = (head_ + 1) % capacity_;
    }
  }

  // Pushes every row of a T x D matrix.
  void push_rows(const Matrix& rows) {
    for (Index i = 0; i < rows.rows(); ++i) push(rows.row(i).transpose());
  }

  void clear() {
    grads_.clear();
    head_ = 0;
  }

  Index size() const { return static_cast<Index>(grads_.size()); }
  bool empty() const { return grads_.empty(); }
  Index capacity() const { return capacity_; }
  Index dim() const { return dim_; }
  GradientMode mode() const { return mode_; }

  // Storage order; the Fisher is invariant to it.
  const Vector& operator[](Index i) const {
    return grads_[static_cast<std::size_t>(i)];
  }

  // T x D matrix of the stored gradients.
  Matrix matrix() const {
    Matrix g(size(), dim_);
    for (Index i = 0; i < size(); ++i) g.row(i) = (*this)[i].transpose();
    return g;
  }

  // Projections g_t . v for every stored gradient.
  Vector project(const Vector& v) const {
    if (v.size() != dim_) throw ShapeError("projection vector length mismatch");
    Vector out(size());
    for (Index i = 0; i < size(); ++i) out[i] = (*this)[i].dot(v);
    return out;
  }

  // Mean squared gradient entry: trace(F) / D.
  double mean_fisher_diagonal() const {
    if (empty()) return 0.0;
    double s = 0.0;
    for (const auto& g : grads_) s += g.squaredNorm();
    return s / static_cast<double>(size()) / static_cast<double>(dim_);
  }

 private:
  Index capacity_ = 0;
  Index dim_ = 0;
  GradientMode mode_ = GradientMode::minibatch;
  Index head_ = 0;
  std::vector<Vector> grads_;
};

}  // namespace pib
