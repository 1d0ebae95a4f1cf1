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

// pibctl: training runs with information-in-weights tracking, PIB training
// by SGLD, sweeps, regularizer comparison, oracle validation and plot data.
//
// Exit codes: 0 success, 1 other failure (including failed oracle checks),
// 2 invalid configuration, 3 a run diverged.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pib/harness/config.hpp"
#include "pib/harness/experiment.hpp"
#include "pib/harness/metrics_io.hpp"
#include "pib_oracles/report.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

pib::ExperimentConfig load_config(const GlobalOptions& g, bool required) {
  pib::ExperimentConfig cfg;
  if (!g.config.empty()) {
    cfg = pib::load_experiment_config(g.config);
  } else if (required) {
    throw pib::ConfigError("--config is required for this command");
  }
  if (g.seed) cfg.seeds = {*g.seed};
  if (!g.out.empty()) cfg.output_dir = g.out;
  cfg.validate();
  return cfg;
}

int run_training(const GlobalOptions& g, const std::string& command) {
  const pib::ExperimentConfig cfg = load_config(g, true);
  const bool ok = (command == "track" && cfg.kind == pib::ExperimentKind::track) ||
                  (command == "pib-train" && cfg.kind == pib::ExperimentKind::pib_train) ||
                  (command == "sweep" && pib::is_sweep(cfg.kind)) ||
                  (command == "compare" && cfg.kind == pib::ExperimentKind::compare_regularizers);
  if (!ok)
    throw pib::ConfigError("config kind '" + pib::to_string(cfg.kind) +
                           "' does not match command '" + command + "'");
  return pib::run_experiment(cfg, &std::cerr);
}

int run_oracle_validate(const GlobalOptions& g) {
  pib::ExperimentConfig cfg = load_config(g, false);
  if (!g.config.empty() && cfg.kind != pib::ExperimentKind::oracle_validate)
    throw pib::ConfigError("config kind must be 'oracle_validate'");
  const auto checks = pib::oracle::run_oracle_suite(cfg.seeds.front(), cfg.oracle_full);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = std::filesystem::path(cfg.output_dir) / "oracle_report.json";
  std::ofstream(path, std::ios::trunc) << pib::oracle::to_json(checks).dump(2) << "\n";
  bool all = true;
  for (const auto& c : checks) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.stage << ": " << c.metric << " = "
              << pib::format_real(c.value) << " (threshold " << pib::format_real(c.threshold)
              << ")\n";
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int run_plot_data(const GlobalOptions& g, const std::vector<std::string>& csvs) {
  std::vector<pib::PlotInput> inputs;
  for (const auto& p : csvs) inputs.push_back({p, p});
  const std::string table = pib::emit_plot_data(inputs);
  if (g.out.empty()) {
    std::cout << table;
  } else {
    std::filesystem::create_directories(g.out);
    std::ofstream(std::filesystem::path(g.out) / "plot_data.csv", std::ios::trunc) << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-in-weights tracking and PIB training for dense networks"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Run only this seed");
  app.add_option("--out", g.out, "Output directory");

  std::vector<std::string> csvs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"track", "Train and log the information in weights"},
      {"pib-train", "Train with the PAC-Bayes information bottleneck by SGLD"},
      {"oracle-validate", "Check each approximation against brute-force references"},
      {"sweep", "Sweep activation, depth, width, batch size or label noise"},
      {"compare", "Compare vanilla, l2, dropout and PIB training"},
      {"plot-data", "Merge metrics CSVs into a long-format series,x,y table"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (name == "plot-data") sub->add_option("csv", csvs, "Metrics CSV files");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pib::kExitConfig;
  }
  if (*seed_opt) g.seed = seed;
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "oracle-validate") return run_oracle_validate(g);
    if (command == "plot-data") return run_plot_data(g, csvs);
    return run_training(g, command);
  } catch (const pib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pib::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
