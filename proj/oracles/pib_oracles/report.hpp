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

#include <vector>

#include <json.hpp>

#include "pib_oracles/checks.hpp"

namespace pib::oracle {

// Every small-scale oracle check. `full` uses the acceptance sample sizes;
// otherwise smaller ones that finish in a few seconds.
inline std::vector<CheckResult> run_oracle_suite(std::uint64_t seed, bool full) {
  std::vector<CheckResult> out;
  const auto add = [&](std::vector<CheckResult> rs) {
    out.insert(out.end(), rs.begin(), rs.end());
  };
  out.push_back(check_gradients(seed));
  out.push_back(check_iiw_fast_path(seed));
  out.push_back(check_gaussian_kl(seed, full ? 1000000 : 200000));
  out.push_back(check_ridge_loo(seed));
  out.push_back(check_logistic_influence(seed));
  out.push_back(check_bootstrap_pipeline(seed, full ? 300 : 100));
  add(check_poisson_moments(seed, full ? 1000000 : 200000));
  add(check_sgld_stationarity(seed));  // shorter chains are too noisy for 0.02
  add(check_hessian_fisher_gap(seed));
  out.push_back(check_log_det(seed));
  return out;
}

inline nlohmann::json to_json(const std::vector<CheckResult>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e = nlohmann::json::object();
    e["pipeline_stage"] = c.stage;
    e["metric"] = c.metric;
    e["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    arr.push_back(e);
  }
  return arr;
}

}  // namespace pib::oracle
