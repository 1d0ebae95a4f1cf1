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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pib/core/errors.hpp"
#include "pib/core/metrics_record.hpp"

namespace pib {

// Per-seed outcome of one run, derived from its logged metrics.
struct RunSummary {
  std::uint64_t seed = 0;
  long records = 0;
  double train_acc = std::nan("");
  double test_acc = std::nan("");
  double gap = std::nan("");  // train_acc - test_acc of the last record
  double final_iiw = std::nan("");
  double peak_iiw = std::nan("");
  long peak_iter = -1;
  long peak_index = -1;
  bool no_compression = false;  // the largest IIW is the last one
  bool diverged = false;
  std::string diagnostic;
  // SGLD runs only.
  std::optional<double> posterior_test_acc;
  std::optional<double> log_det_prior;
  std::optional<double> damping;
};

inline RunSummary summarize_metrics(const std::vector<MetricsRecord>& metrics, std::uint64_t seed) {
  RunSummary s;
  s.seed = seed;
  s.records = static_cast<long>(metrics.size());
  if (metrics.empty()) return s;
  const auto& last = metrics.back();
  s.train_acc = last.train_acc;
  s.test_acc = last.test_acc;
  s.gap = s.train_acc - s.test_acc;
  s.final_iiw = last.iiw;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (s.peak_index < 0 || metrics[i].iiw > s.peak_iiw) {
      s.peak_iiw = metrics[i].iiw;
      s.peak_iter = metrics[i].iter;
      s.peak_index = static_cast<long>(i);
    }
  }
  s.no_compression = s.peak_index == s.records - 1;
  return s;
}

namespace detail {

inline nlohmann::json real_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const RunSummary& s) {
  using detail::real_or_null;
  nlohmann::json j = nlohmann::json::object();
  j["seed"] = s.seed;
  j["records"] = s.records;
  j["train_acc"] = real_or_null(s.train_acc);
  j["test_acc"] = real_or_null(s.test_acc);
  j["gap"] = real_or_null(s.gap);
  j["final_iiw"] = real_or_null(s.final_iiw);
  j["peak_iiw"] = real_or_null(s.peak_iiw);
  j["peak_iter"] = s.peak_iter;
  j["peak_index"] = s.peak_index;
  j["no_compression"] = s.no_compression;
  j["diverged"] = s.diverged;
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  if (s.posterior_test_acc) j["posterior_test_acc"] = real_or_null(*s.posterior_test_acc);
  if (s.log_det_prior) j["log_det_prior"] = real_or_null(*s.log_det_prior);
  if (s.damping) j["damping"] = real_or_null(*s.damping);
  return j;
}

// Mean and normal-approximation 95% interval mean +/- 1.96 stderr with the
// sample standard deviation. A single value has no interval.
struct MeanCi {
  double mean = 0.0;
  std::optional<double> low;
  std::optional<double> high;
};

inline MeanCi mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) throw ConfigError("confidence interval of an empty list");
  MeanCi r;
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = static_cast<double>(xs.size());
  r.mean = s / m;
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  const double stderr_ = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  r.low = r.mean - 1.96 * stderr_;
  r.high = r.mean + 1.96 * stderr_;
  return r;
}

}  // namespace pib
