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

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pib/core/errors.hpp"
#include "pib/core/metrics_record.hpp"

namespace pib {

inline const std::vector<std::string>& base_metric_columns() {
  static const std::vector<std::string> cols = {"train_loss", "train_acc", "test_acc", "iiw",
                                                "lr"};
  return cols;
}

inline const std::vector<std::string>& pib_metric_columns() {
  static const std::vector<std::string> cols = {"train_loss", "train_acc", "test_acc", "iiw",
                                                "lr", "temperature", "energy"};
  return cols;
}

// %.17g round-trips every double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& s, const std::string& where) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (s.empty()) throw ParseError(where + ": empty field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw ParseError(where + ": '" + s + "' is not a number");
  return v;
}

// Appends rows to a metrics CSV: iter, the base columns and, for SGLD runs,
// temperature and energy. The header is written on construction.
class MetricsCsvWriter {
 public:
  MetricsCsvWriter(const std::string& path, bool with_sgld_columns)
      : out_(path, std::ios::trunc), sgld_(with_sgld_columns) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    out_ << "iter";
    for (const auto& c : sgld_ ? pib_metric_columns() : base_metric_columns()) out_ << ',' << c;
    out_ << '\n';
    out_.flush();
  }

  void write(const MetricsRecord& r) {
    out_ << r.iter << ',' << format_real(r.train_loss) << ',' << format_real(r.train_acc) << ','
         << format_real(r.test_acc) << ',' << format_real(r.iiw) << ',' << format_real(r.lr);
    if (sgld_) out_ << ',' << format_real(r.temperature) << ',' << format_real(r.energy);
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  bool sgld_;
};

struct MetricsTable {
  std::vector<std::string> columns;  // without "iter"
  std::vector<long> iters;
  std::vector<std::vector<double>> values;  // one row per iteration
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline MetricsTable read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  MetricsTable t;
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path + ":1: missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "iter")
    throw ParseError(path + ":1: header must start with 'iter'");
  t.columns.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.empty()) throw ParseError(where + ": empty line");
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    char* end = nullptr;
    const long it = std::strtol(cells[0].c_str(), &end, 10);
    if (cells[0].empty() || end != cells[0].c_str() + cells[0].size())
      throw ParseError(where + ": bad iteration '" + cells[0] + "'");
    t.iters.push_back(it);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_real(cells[i], where));
    t.values.push_back(std::move(row));
  }
  return t;
}

// Long-format table "series,x,y" with one row per (series, iteration). The
// series name is "<label>/<column>".
struct PlotInput {
  std::string label;
  std::string path;
};

inline std::string emit_plot_data(const std::vector<PlotInput>& inputs) {
  std::string out = "series,x,y\n";
  for (const auto& in : inputs) {
    const MetricsTable t = read_metrics_csv(in.path);
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      for (std::size_t r = 0; r < t.iters.size(); ++r)
        out += in.label + "/" + t.columns[c] + "," + std::to_string(t.iters[r]) + "," +
               format_real(t.values[r][c]) + "\n";
  }
  return out;
}

}  // namespace pib
