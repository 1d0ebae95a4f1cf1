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

// Acceptance run: one PASS/FAIL line per criterion. Numerical criteria use
// the reference checks in-process; the training criteria run pibctl on the
// configs under configs/ and read back its aggregate.json.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pib/harness/config.hpp"
#include "pib/harness/metrics_io.hpp"
#include "pib_oracles/checks.hpp"

namespace {

namespace fs = std::filesystem;
using pib::oracle::CheckResult;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string describe(const std::vector<CheckResult>& checks, bool& all) {
  std::string s;
  all = true;
  for (const auto& c : checks) {
    if (!s.empty()) s += "; ";
    s += c.metric + " = " + short_real(c.value) + " (limit " + short_real(c.threshold) + ")";
    all = all && c.pass;
  }
  return s;
}

Outcome from_checks(const std::vector<CheckResult>& checks) {
  Outcome o;
  o.detail = describe(checks, o.pass);
  return o;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_pibctl(const std::vector<std::string>& args, const fs::path& log,
               const fs::path& cwd = {}) {
  std::string cmd = cwd.empty() ? "" : "cd " + quote(cwd.string()) + " && ";
  cmd += quote(PIBNET_PIBCTL);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >>" + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return nlohmann::json::parse(in);
}

std::string config(const std::string& name) {
  return (fs::path(PIBNET_CONFIG_DIR) / name).string();
}

// Runs `command` on a config into `out` and returns its aggregate.json.
nlohmann::json run_config(const std::string& command, const std::string& name, const fs::path& out,
                          const fs::path& log) {
  fs::remove_all(out);
  const int code = run_pibctl({command, "--config", config(name), "--out", out.string()}, log);
  if (code != 0)
    throw std::runtime_error("pibctl " + command + " exited with " + std::to_string(code) +
                             " (see " + log.string() + ")");
  return read_json(out / "aggregate.json");
}

double num(const nlohmann::json& v) {
  return v.is_null() ? std::nan("") : v.get<double>();
}

Outcome phase_transition(const fs::path& work) {
  const auto cfg = pib::load_experiment_config(config("phase_transition.json"));
  const auto agg = run_config("sweep", "phase_transition.json", work / "phase_transition",
                              work / "phase_transition.log");
  const auto& cells = agg["cells"];
  long good = 0;
  std::ostringstream d;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    bool ok = true;
    d << "seed " << cfg.seeds[s] << ":";
    for (const auto& cell : cells) {
      const auto& run = cell["runs"][s];
      const double peak = num(run["peak_iiw"]), fin = num(run["final_iiw"]);
      const long peak_iter = run["peak_iter"].get<long>();
      const bool early = 2 * peak_iter < cfg.iterations;
      const bool drop = fin <= 0.7 * peak;
      ok = ok && early && drop;
      d << " " << cell["value"].get<std::string>() << "(peak@" << peak_iter << ", final/peak "
        << short_real(fin / peak) << ")";
    }
    good += ok;
    d << (ok ? " ok; " : " no; ");
  }
  d << good << "/" << cfg.seeds.size() << " seeds (need 4/5)";
  return {good >= 4, d.str()};
}

Outcome label_noise(const fs::path& work) {
  const auto agg =
      run_config("sweep", "label_noise.json", work / "label_noise", work / "label_noise.log");
  std::ostringstream d;
  for (const auto& e : agg["per_seed"]) {
    d << "seed " << e["seed"] << ": [";
    for (const auto& f : e["final_iiw"]) d << " " << short_real(num(f));
    d << " ]" << (e["strictly_increasing"].get<bool>() ? " ok; " : " no; ");
  }
  const long n = agg["seeds_strictly_increasing"].get<long>();
  d << n << "/5 seeds strictly increasing (need 4/5)";
  return {n >= 4, d.str()};
}

Outcome batch_size(const fs::path& work) {
  const auto agg =
      run_config("sweep", "batch_size.json", work / "batch_size", work / "batch_size.log");
  std::ostringstream d;
  for (const auto& e : agg["per_seed"]) {
    d << "seed " << e["seed"] << ": [";
    for (const auto& f : e["final_iiw"]) d << " " << short_real(num(f));
    d << " ] argmin " << e["argmin_index"] << "; ";
  }
  const long n = agg["seeds_interior_argmin"].get<long>();
  d << n << "/5 seeds with interior argmin (need 3/5)";
  return {n >= 3, d.str()};
}

Outcome pib_vs_vanilla(const fs::path& work) {
  const auto agg = run_config("compare", "pib_vs_vanilla.json", work / "pib_vs_vanilla",
                              work / "pib_vs_vanilla.log");
  std::ostringstream d;
  for (const auto& m : agg["methods"]) {
    d << m["method"].get<std::string>() << " mean " << short_real(num(m["mean"])) << " [";
    for (const auto& a : m["accuracy"]) d << " " << short_real(num(a));
    d << " ]; ";
  }
  const long wins = agg["seeds_pib_ge_vanilla"].get<long>();
  d << wins << "/10 seeds with PIB >= vanilla (need 7/10)";
  return {wins >= 7, d.str()};
}

std::vector<fs::path> artifacts(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".json"))
      out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"track", "smoke_track.json"},
      {"pib-train", "smoke_pib.json"},
      {"sweep", "smoke_sweep.json"},
      {"compare", "smoke_compare.json"},
      {"oracle-validate", "oracle_validate.json"},
  };
  const fs::path log = work / "determinism.log";
  for (const char* rep : {"a", "b"}) {
    const fs::path base = work / "determinism" / rep;
    fs::remove_all(base);
    for (const auto& [cmd, cfg] : runs) {
      const fs::path out = base / cmd;
      const int code = run_pibctl({cmd, "--config", config(cfg), "--out", out.string()}, log);
      if (code != 0) return {false, "pibctl " + cmd + " exited with " + std::to_string(code)};
    }
    // Relative input path: plot-data labels series with it.
    if (run_pibctl({"plot-data", "--out", "plot", "track/seed_1/metrics.csv"}, log, base) != 0)
      return {false, "pibctl plot-data failed"};
  }
  const fs::path a = work / "determinism" / "a", b = work / "determinism" / "b";
  const auto fa = artifacts(a), fb = artifacts(b);
  if (fa != fb) return {false, "different artifact sets"};
  long differing = 0;
  std::string first;
  for (const auto& f : fa) {
    if (slurp(a / f) != slurp(b / f)) {
      if (differing++ == 0) first = f.string();
    }
  }
  std::ostringstream d;
  d << fa.size() << " CSV/JSON files compared, " << differing << " differ";
  if (differing) d << " (first: " << first << ")";
  return {differing == 0 && !fa.empty(), d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "pibnet_acceptance";
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.push_back(std::stoi(tok));
    } else {
      std::cerr << "usage: " << argv[0] << " [--work-dir DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  using pib::oracle::check_gradients;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", [] { return from_checks({check_gradients(1)}); }},
      {"IIW fast path vs dense quadratic form",
       [] { return from_checks({pib::oracle::check_iiw_fast_path(1)}); }},
      {"Gaussian KL vs Monte Carlo",
       [] { return from_checks({pib::oracle::check_gaussian_kl(1, 1000000)}); }},
      {"influence functions",
       [] {
         return from_checks(
             {pib::oracle::check_ridge_loo(1), pib::oracle::check_logistic_influence(1)});
       }},
      {"bootstrap covariance vs Fisher prior covariance",
       [] { return from_checks({pib::oracle::check_bootstrap_pipeline(1, 300)}); }},
      {"Poisson bootstrap moments",
       [] { return from_checks(pib::oracle::check_poisson_moments(1, 1000000)); }},
      {"SGLD stationarity",
       [] { return from_checks(pib::oracle::check_sgld_stationarity(1, 100000, 1000)); }},
      {"phase transition", [&] { return phase_transition(work); }},
      {"label-noise monotonicity", [&] { return label_noise(work); }},
      {"interior batch-size minimum", [&] { return batch_size(work); }},
      {"PIB vs vanilla", [&] { return pib_vs_vanilla(work); }},
      {"Hessian vs Fisher", [] { return from_checks(pib::oracle::check_hessian_fisher_gap(1)); }},
      {"determinism", [&] { return determinism(work); }},
      {"log-det Gram path", [] { return from_checks({pib::oracle::check_log_det(1)}); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
