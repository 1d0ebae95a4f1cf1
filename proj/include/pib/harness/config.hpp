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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pib/core/errors.hpp"
#include "pib/iiw/tracker.hpp"
#include "pib/nn/network.hpp"
#include "pib/sgld/pib_training.hpp"

#ifndef PIBNET_DATA_DIR
#define PIBNET_DATA_DIR "data"
#endif

namespace pib {

enum class ExperimentKind {
  track,
  pib_train,
  oracle_validate,
  sweep_activation,
  sweep_depth,
  sweep_width,
  sweep_batch,
  sweep_noise,
  compare_regularizers,
};

inline constexpr std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::track, "track"},
    {ExperimentKind::pib_train, "pib_train"},
    {ExperimentKind::oracle_validate, "oracle_validate"},
    {ExperimentKind::sweep_activation, "sweep_activation"},
    {ExperimentKind::sweep_depth, "sweep_depth"},
    {ExperimentKind::sweep_width, "sweep_width"},
    {ExperimentKind::sweep_batch, "sweep_batch"},
    {ExperimentKind::sweep_noise, "sweep_noise"},
    {ExperimentKind::compare_regularizers, "compare_regularizers"},
};

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kExperimentNames)
    if (kind == k) return name;
  return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [kind, name] : kExperimentNames)
    if (s == name) return kind;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

inline bool is_sweep(ExperimentKind k) {
  return k == ExperimentKind::sweep_activation || k == ExperimentKind::sweep_depth ||
         k == ExperimentKind::sweep_width || k == ExperimentKind::sweep_batch ||
         k == ExperimentKind::sweep_noise;
}

// One experiment, read from a flat JSON object. Values are scalars or
// arrays of scalars; unknown keys are rejected.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::track;

  // Data.
  std::string dataset = "mnist";  // mnist | blobs
  std::string data_dir = std::string(PIBNET_DATA_DIR) + "/mnist";
  Index train_size = 4096;
  Index test_size = 2048;
  double label_noise = 0.0;
  Index blob_dim = 20;
  int blob_classes = 4;
  double blob_separation = 4.0;

  // Network.
  std::vector<Index> hidden = {64};
  Activation activation = Activation::relu;

  // Training and information tracking.
  OptimizerKind optimizer = OptimizerKind::sgd;
  double lr = 0.05;
  Index batch_size = 64;
  long iterations = 2000;
  long warmup_iterations = -1;
  Theta0Policy theta0 = Theta0Policy::warmup;
  Index fisher_samples = 512;
  GradientMode gradient_mode = GradientMode::minibatch;
  double rho = 0.9;
  Index window = 5;
  long log_interval = 0;
  double l2 = 0.0;
  double dropout = 0.0;
  std::optional<double> clip;

  // SGLD / PIB.
  double eta0 = 0.05;
  double beta0 = 1e-5;
  DecayKind decay_eta = DecayKind::constant;
  DecayKind decay_beta = DecayKind::constant;
  double eta_min = 0.0;
  double beta_min = 1e-8;
  long burn_in = -1;  // -1: iterations / 2
  long sample_stride = 100;
  LikelihoodScaling likelihood_scaling = LikelihoodScaling::batch_squared;
  Index prior_fisher_samples = 32;
  GradientMode prior_mode = GradientMode::per_sample;
  double damping = 0.1;
  long refresh_interval = 0;

  // Sweeps and comparisons.
  std::vector<nlohmann::json> sweep_values;
  std::vector<std::string> methods = {"vanilla", "l2", "dropout", "pib"};
  double compare_l2 = 5e-4;
  double compare_dropout = 0.2;

  // Oracle validation.
  bool oracle_full = false;

  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "runs";

  NetworkSpec network(Index input_dim, int classes) const {
    NetworkSpec s;
    s.layer_sizes.push_back(input_dim);
    for (Index h : hidden) s.layer_sizes.push_back(h);
    s.layer_sizes.push_back(classes);
    s.activation = activation;
    return s;
  }

  TrackConfig track_config() const {
    TrackConfig c;
    c.iterations = iterations;
    c.batch_size = batch_size;
    c.optimizer.kind = optimizer;
    c.optimizer.lr = lr;
    c.l2 = l2;
    c.dropout = dropout;
    c.clip = clip;
    c.theta0 = theta0;
    c.warmup_iterations = warmup_iterations;
    c.fisher_samples = fisher_samples;
    c.gradient_mode = gradient_mode;
    c.rho = rho;
    c.window = window;
    c.log_interval = log_interval;
    return c;
  }

  PibConfig pib_config() const {
    PibConfig c;
    c.sgld.eta0 = eta0;
    c.sgld.beta0 = beta0;
    c.sgld.decay_eta = decay_eta;
    c.sgld.decay_beta = decay_beta;
    c.sgld.eta_min = eta_min;
    c.sgld.beta_min = beta_min;
    c.sgld.burn_in = burn_in >= 0 ? burn_in : iterations / 2;
    c.sgld.sample_stride = sample_stride;
    c.sgld.batch_size = batch_size;
    c.sgld.iterations = iterations;
    c.scaling = likelihood_scaling;
    c.warmup_optimizer.kind = optimizer;
    c.warmup_optimizer.lr = lr;
    c.warmup_iterations = warmup_iterations;
    c.prior_fisher_samples = prior_fisher_samples;
    c.prior_mode = prior_mode;
    c.damping = damping;
    c.refresh_interval = refresh_interval;
    c.clip = clip;
    c.fisher_samples = fisher_samples;
    c.gradient_mode = gradient_mode;
    c.rho = rho;
    c.window = window;
    c.log_interval = log_interval;
    return c;
  }

  void validate() const {
    if (dataset != "mnist" && dataset != "blobs")
      throw ConfigError("dataset must be 'mnist' or 'blobs'");
    if (train_size < 1 || test_size < 0) throw ConfigError("train_size must be >= 1, test_size >= 0");
    if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw ConfigError("label_noise must lie in [0, 1]");
    if (blob_dim < 1 || blob_classes < 2) throw ConfigError("blobs need dim >= 1 and >= 2 classes");
    for (Index h : hidden)
      if (h < 1) throw ConfigError("hidden widths must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
    if (is_sweep(kind) && sweep_values.empty()) throw ConfigError("sweep needs sweep_values");
    if (kind == ExperimentKind::compare_regularizers) {
      if (methods.size() < 2) throw ConfigError("compare needs at least two methods");
      for (const auto& m : methods)
        if (m != "vanilla" && m != "l2" && m != "dropout" && m != "pib")
          throw ConfigError("unknown method '" + m + "'");
    }
    if (compare_l2 < 0.0) throw ConfigError("compare_l2 must be >= 0");
    if (!(compare_dropout >= 0.0 && compare_dropout < 1.0))
      throw ConfigError("compare_dropout must lie in [0, 1)");
    if (kind != ExperimentKind::oracle_validate) track_config().validate();
    if (kind == ExperimentKind::pib_train ||
        (kind == ExperimentKind::compare_regularizers &&
         std::find(methods.begin(), methods.end(), "pib") != methods.end())) {
      if (!(damping > 0.0)) throw ConfigError("damping must be > 0");
      if (iterations > 0) pib_config().validate();
    }
  }
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

inline double json_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("config key '" + key + "' must be finite");
  return d;
}

inline long json_integer(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<long>();
}

inline std::string json_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  using detail::json_integer;
  using detail::json_number;
  using detail::json_string;
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (!v.is_array() && v.is_structured())
      throw ConfigError("config key '" + key + "' must be a scalar or array");
    if (key == "kind") c.kind = parse_experiment_kind(json_string(v, key));
    else if (key == "dataset") c.dataset = json_string(v, key);
    else if (key == "data_dir") c.data_dir = json_string(v, key);
    else if (key == "train_size") c.train_size = json_integer(v, key);
    else if (key == "test_size") c.test_size = json_integer(v, key);
    else if (key == "label_noise") c.label_noise = json_number(v, key);
    else if (key == "blob_dim") c.blob_dim = json_integer(v, key);
    else if (key == "blob_classes") c.blob_classes = static_cast<int>(json_integer(v, key));
    else if (key == "blob_separation") c.blob_separation = json_number(v, key);
    else if (key == "hidden") {
      if (!v.is_array()) throw ConfigError("config key 'hidden' must be an array");
      c.hidden.clear();
      for (const auto& h : v) c.hidden.push_back(json_integer(h, key));
    } else if (key == "activation") c.activation = parse_activation(json_string(v, key));
    else if (key == "optimizer") c.optimizer = parse_optimizer(json_string(v, key));
    else if (key == "lr") c.lr = json_number(v, key);
    else if (key == "batch_size") c.batch_size = json_integer(v, key);
    else if (key == "iterations") c.iterations = json_integer(v, key);
    else if (key == "warmup_iterations") c.warmup_iterations = json_integer(v, key);
    else if (key == "theta0") {
      const auto s = json_string(v, key);
      if (s == "init") c.theta0 = Theta0Policy::init;
      else if (s == "warmup") c.theta0 = Theta0Policy::warmup;
      else throw ConfigError("theta0 must be 'init' or 'warmup'");
    } else if (key == "fisher_samples") c.fisher_samples = json_integer(v, key);
    else if (key == "gradient_mode") c.gradient_mode = parse_gradient_mode(json_string(v, key));
    else if (key == "rho") c.rho = json_number(v, key);
    else if (key == "window") c.window = json_integer(v, key);
    else if (key == "log_interval") c.log_interval = json_integer(v, key);
    else if (key == "l2") c.l2 = json_number(v, key);
    else if (key == "dropout") c.dropout = json_number(v, key);
    else if (key == "clip") {
      if (v.is_null()) c.clip.reset();
      else c.clip = json_number(v, key);
    } else if (key == "eta0") c.eta0 = json_number(v, key);
    else if (key == "beta0") c.beta0 = json_number(v, key);
    else if (key == "decay_eta") c.decay_eta = parse_decay(json_string(v, key));
    else if (key == "decay_beta") c.decay_beta = parse_decay(json_string(v, key));
    else if (key == "eta_min") c.eta_min = json_number(v, key);
    else if (key == "beta_min") c.beta_min = json_number(v, key);
    else if (key == "burn_in") c.burn_in = json_integer(v, key);
    else if (key == "sample_stride") c.sample_stride = json_integer(v, key);
    else if (key == "likelihood_scaling")
      c.likelihood_scaling = parse_likelihood_scaling(json_string(v, key));
    else if (key == "prior_fisher_samples") c.prior_fisher_samples = json_integer(v, key);
    else if (key == "prior_mode") c.prior_mode = parse_gradient_mode(json_string(v, key));
    else if (key == "damping") c.damping = json_number(v, key);
    else if (key == "refresh_interval") c.refresh_interval = json_integer(v, key);
    else if (key == "sweep_values") {
      if (!v.is_array()) throw ConfigError("config key 'sweep_values' must be an array");
      c.sweep_values.assign(v.begin(), v.end());
    } else if (key == "methods") {
      if (!v.is_array()) throw ConfigError("config key 'methods' must be an array");
      c.methods.clear();
      for (const auto& m : v) c.methods.push_back(json_string(m, key));
    } else if (key == "compare_l2") c.compare_l2 = json_number(v, key);
    else if (key == "compare_dropout") c.compare_dropout = json_number(v, key);
    else if (key == "oracle_full") {
      if (!v.is_boolean()) throw ConfigError("config key 'oracle_full' must be a boolean");
      c.oracle_full = v.get<bool>();
    } else if (key == "seeds") {
      if (!v.is_array()) throw ConfigError("config key 'seeds' must be an array");
      c.seeds.clear();
      for (const auto& s : v) {
        const long x = json_integer(s, key);
        if (x < 0) throw ConfigError("seeds must be non-negative");
        c.seeds.push_back(static_cast<std::uint64_t>(x));
      }
    } else if (key == "output_dir") c.output_dir = json_string(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

}  // namespace pib
