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
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pib/core/errors.hpp"
#include "pib/data/idx.hpp"
#include "pib/data/synthetic.hpp"
#include "pib/harness/config.hpp"
#include "pib/harness/metrics_io.hpp"
#include "pib/harness/summary.hpp"
#include "pib/iiw/tracker.hpp"
#include "pib/sgld/checkpoint.hpp"
#include "pib/sgld/pib_training.hpp"

namespace pib {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

struct ExperimentData {
  Dataset train;
  Dataset test;
};

// Train/test sets of one seed. Subsampling and label corruption draw from the
// seed's data stream, so every experiment kind sees the same data for a seed.
inline ExperimentData load_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, stream::data);
  ExperimentData d;
  if (cfg.dataset == "mnist") {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.data_dir);
    const Dataset full_train = load_idx((dir / "train-images-idx3-ubyte.gz").string(),
                                        (dir / "train-labels-idx1-ubyte.gz").string());
    const Dataset full_test = load_idx((dir / "test-images-idx3-ubyte.gz").string(),
                                       (dir / "test-labels-idx1-ubyte.gz").string());
    if (cfg.train_size > full_train.size() || cfg.test_size > full_test.size())
      throw ConfigError("requested subset exceeds the available MNIST samples");
    d.train = subsample(full_train, cfg.train_size, rng);
    if (cfg.test_size > 0) d.test = subsample(full_test, cfg.test_size, rng);
  } else {
    const Dataset all = synthetic_blobs(cfg.train_size + std::max<Index>(cfg.test_size, 0),
                                        cfg.blob_dim, cfg.blob_classes, cfg.blob_separation, rng);
    std::vector<Index> tr(static_cast<std::size_t>(cfg.train_size));
    std::vector<Index> te(static_cast<std::size_t>(cfg.test_size));
    for (Index i = 0; i < cfg.train_size; ++i) tr[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < cfg.test_size; ++i) te[static_cast<std::size_t>(i)] = cfg.train_size + i;
    d.train = all.subset(tr);
    if (cfg.test_size > 0) d.test = all.subset(te);
  }
  if (cfg.label_noise > 0.0) d.train = corrupt_labels(d.train, cfg.label_noise, rng);
  return d;
}

struct CellResult {
  RunSummary summary;
  double method_accuracy = 0.0;  // final weights, or posterior mean for SGLD
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  write_text(p, j.dump(2) + "\n");
}

}  // namespace detail

// One (config, seed) run in `dir`: metrics.csv and summary.json, plus
// checkpoint.bin when an SGLD run diverges. Wall-clock time goes to
// timing.txt so the CSV and JSON artifacts stay reproducible byte for byte.
inline CellResult run_cell(const ExperimentConfig& cfg, bool sgld, std::uint64_t seed,
                           const std::filesystem::path& dir, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentData data = load_experiment_data(cfg, seed);
  const Dataset* test = cfg.test_size > 0 ? &data.test : nullptr;
  const NetworkSpec spec = cfg.network(data.train.dim(), data.train.num_classes);
  MetricsCsvWriter csv((dir / "metrics.csv").string(), sgld);
  auto sink = [&](const MetricsRecord& r) { csv.write(r); };

  CellResult out;
  if (!sgld) {
    const TrackResult r = track_iiw_during_training(spec, data.train, test, cfg.track_config(), seed, sink);
    out.summary = summarize_metrics(r.metrics, seed);
    out.summary.diverged = r.diverged;
    out.summary.diagnostic = r.diagnostic;
    out.method_accuracy = test ? accuracy(spec, r.params, *test) : std::nan("");
  } else {
    const PibResult r = run_pib_training(spec, data.train, test, cfg.pib_config(), seed, sink);
    out.summary = summarize_metrics(r.metrics, seed);
    out.summary.diverged = r.diverged;
    out.summary.diagnostic = r.diagnostic;
    out.summary.log_det_prior = r.log_det_prior;
    out.summary.damping = r.damping;
    if (test && !r.samples.empty()) {
      out.summary.posterior_test_acc = posterior_accuracy(r.samples, spec, *test);
      out.method_accuracy = *out.summary.posterior_test_acc;
    } else {
      out.method_accuracy = test ? accuracy(spec, r.params, *test) : std::nan("");
    }
    if (r.diverged) write_checkpoint((dir / "checkpoint.bin").string(), r.last_stable);
  }
  detail::write_json(dir / "summary.json", to_json(out.summary));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail::write_text(dir / "timing.txt", format_real(secs) + "\n");
  if (log)
    *log << dir.string() << ": final iiw " << format_real(out.summary.final_iiw) << ", "
         << format_real(secs) << " s" << (out.summary.diverged ? " (diverged)" : "") << "\n";
  return out;
}

// Config of one sweep cell: the base config with the swept axis set.
inline ExperimentConfig sweep_cell_config(const ExperimentConfig& base, const nlohmann::json& v) {
  ExperimentConfig c = base;
  const std::string key = "sweep_values";
  switch (base.kind) {
    case ExperimentKind::sweep_activation:
      c.activation = parse_activation(detail::json_string(v, key));
      break;
    case ExperimentKind::sweep_depth: {
      const long depth = detail::json_integer(v, key);
      if (depth < 1) throw ConfigError("sweep depth must be >= 1");
      c.hidden.assign(static_cast<std::size_t>(depth), base.hidden.empty() ? 64 : base.hidden[0]);
      break;
    }
    case ExperimentKind::sweep_width: {
      const long width = detail::json_integer(v, key);
      if (width < 1) throw ConfigError("sweep width must be >= 1");
      c.hidden.assign(std::max<std::size_t>(base.hidden.size(), 1), width);
      break;
    }
    case ExperimentKind::sweep_batch:
      c.batch_size = detail::json_integer(v, key);
      break;
    case ExperimentKind::sweep_noise:
      c.label_noise = detail::json_number(v, key);
      break;
    default:
      throw ConfigError("not a sweep kind");
  }
  c.kind = ExperimentKind::track;
  c.sweep_values.clear();
  c.validate();
  return c;
}

inline std::string sweep_label(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  return format_real(v.get<double>());
}

inline std::string sweep_axis(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::sweep_activation: return "activation";
    case ExperimentKind::sweep_depth: return "depth";
    case ExperimentKind::sweep_width: return "width";
    case ExperimentKind::sweep_batch: return "batch";
    case ExperimentKind::sweep_noise: return "noise";
    default: return "";
  }
}

// Aggregate of a sweep: per-seed final IIW over the swept values with
// monotonicity and interior-minimum flags.
inline nlohmann::json aggregate_sweep(const ExperimentConfig& cfg,
                                      const std::vector<std::vector<RunSummary>>& cells) {
  nlohmann::json agg = nlohmann::json::object();
  agg["kind"] = to_string(cfg.kind);
  agg["axis"] = sweep_axis(cfg.kind);
  agg["values"] = cfg.sweep_values;
  nlohmann::json jcells = nlohmann::json::array();
  for (std::size_t v = 0; v < cells.size(); ++v) {
    nlohmann::json c = nlohmann::json::object();
    c["value"] = cfg.sweep_values[v];
    nlohmann::json runs = nlohmann::json::array();
    double sum = 0.0;
    for (const auto& s : cells[v]) {
      runs.push_back(to_json(s));
      sum += s.final_iiw;
    }
    c["runs"] = runs;
    c["mean_final_iiw"] = detail::real_or_null(sum / static_cast<double>(cells[v].size()));
    jcells.push_back(c);
  }
  agg["cells"] = jcells;
  nlohmann::json per_seed = nlohmann::json::array();
  long increasing = 0, interior = 0;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    std::vector<double> f;
    for (const auto& cell : cells) f.push_back(cell[s].final_iiw);
    bool inc = true;
    for (std::size_t i = 1; i < f.size(); ++i) inc = inc && f[i] > f[i - 1];
    const auto argmin = static_cast<long>(std::min_element(f.begin(), f.end()) - f.begin());
    const bool inner = argmin > 0 && argmin + 1 < static_cast<long>(f.size());
    increasing += inc;
    interior += inner;
    nlohmann::json e = nlohmann::json::object();
    e["seed"] = cfg.seeds[s];
    nlohmann::json fj = nlohmann::json::array();
    for (double x : f) fj.push_back(detail::real_or_null(x));
    e["final_iiw"] = fj;
    e["strictly_increasing"] = inc;
    e["argmin_index"] = argmin;
    e["interior_argmin"] = inner;
    per_seed.push_back(e);
  }
  agg["per_seed"] = per_seed;
  agg["seeds_strictly_increasing"] = increasing;
  agg["seeds_interior_argmin"] = interior;
  return agg;
}

inline nlohmann::json aggregate_compare(const ExperimentConfig& cfg,
                                        const std::vector<std::vector<CellResult>>& by_method) {
  nlohmann::json agg = nlohmann::json::object();
  agg["kind"] = to_string(cfg.kind);
  nlohmann::json methods = nlohmann::json::array();
  for (std::size_t m = 0; m < by_method.size(); ++m) {
    std::vector<double> acc;
    for (const auto& c : by_method[m]) acc.push_back(c.method_accuracy);
    const MeanCi ci = mean_ci95(acc);
    nlohmann::json e = nlohmann::json::object();
    e["method"] = cfg.methods[m];
    e["accuracy"] = acc;
    e["mean"] = detail::real_or_null(ci.mean);
    e["ci_low"] = ci.low ? nlohmann::json(*ci.low) : nlohmann::json(nullptr);
    e["ci_high"] = ci.high ? nlohmann::json(*ci.high) : nlohmann::json(nullptr);
    methods.push_back(e);
  }
  agg["methods"] = methods;
  const auto find = [&](const std::string& name) -> long {
    const auto it = std::find(cfg.methods.begin(), cfg.methods.end(), name);
    return it == cfg.methods.end() ? -1 : static_cast<long>(it - cfg.methods.begin());
  };
  const long pib = find("pib"), vanilla = find("vanilla");
  if (pib >= 0 && vanilla >= 0) {
    long wins = 0;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
      wins += by_method[static_cast<std::size_t>(pib)][s].method_accuracy >=
              by_method[static_cast<std::size_t>(vanilla)][s].method_accuracy;
    agg["seeds_pib_ge_vanilla"] = wins;
  }
  return agg;
}

inline ExperimentConfig method_config(const ExperimentConfig& base, const std::string& method) {
  ExperimentConfig c = base;
  c.l2 = method == "l2" ? base.compare_l2 : 0.0;
  c.dropout = method == "dropout" ? base.compare_dropout : 0.0;
  c.kind = method == "pib" ? ExperimentKind::pib_train : ExperimentKind::track;
  return c;
}

// Runs a validated training, sweep or comparison experiment and writes its
// artifacts under cfg.output_dir. Returns kExitDiverged when any run
// diverged; the artifacts written so far are kept.
inline int run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  cfg.validate();
  const fs::path root(cfg.output_dir);
  fs::create_directories(root);
  bool diverged = false;
  const auto seed_dir = [](std::uint64_t s) { return "seed_" + std::to_string(s); };

  if (cfg.kind == ExperimentKind::track || cfg.kind == ExperimentKind::pib_train) {
    const bool sgld = cfg.kind == ExperimentKind::pib_train;
    nlohmann::json runs = nlohmann::json::array();
    for (auto s : cfg.seeds) {
      const CellResult r = run_cell(cfg, sgld, s, root / seed_dir(s), log);
      runs.push_back(to_json(r.summary));
      diverged = diverged || r.summary.diverged;
      if (diverged) break;
    }
    nlohmann::json agg = nlohmann::json::object();
    agg["kind"] = to_string(cfg.kind);
    agg["runs"] = runs;
    detail::write_json(root / "aggregate.json", agg);
  } else if (is_sweep(cfg.kind)) {
    std::vector<std::vector<RunSummary>> cells;
    for (const auto& v : cfg.sweep_values) {
      const ExperimentConfig cell = sweep_cell_config(cfg, v);
      std::vector<RunSummary> runs;
      for (auto s : cfg.seeds) {
        const auto dir = root / (sweep_axis(cfg.kind) + "_" + sweep_label(v)) / seed_dir(s);
        runs.push_back(run_cell(cell, false, s, dir, log).summary);
        diverged = diverged || runs.back().diverged;
      }
      cells.push_back(std::move(runs));
    }
    detail::write_json(root / "aggregate.json", aggregate_sweep(cfg, cells));
  } else if (cfg.kind == ExperimentKind::compare_regularizers) {
    std::vector<std::vector<CellResult>> by_method;
    for (const auto& m : cfg.methods) {
      const ExperimentConfig mc = method_config(cfg, m);
      std::vector<CellResult> runs;
      for (auto s : cfg.seeds) {
        runs.push_back(run_cell(mc, m == "pib", s, root / m / seed_dir(s), log));
        diverged = diverged || runs.back().summary.diverged;
      }
      by_method.push_back(std::move(runs));
    }
    detail::write_json(root / "aggregate.json", aggregate_compare(cfg, by_method));
  } else {
    throw ConfigError("experiment kind '" + to_string(cfg.kind) + "' is not a training run");
  }
  return diverged ? kExitDiverged : kExitOk;
}

}  // namespace pib
