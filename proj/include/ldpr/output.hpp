// Copyright 2026 The LDPRecover Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDPR_OUTPUT_HPP_
#define LDPR_OUTPUT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldpr/eval.hpp"

namespace ldpr::output {

// Scientific notation with 3 significant digits, table style: 5.89E-4.
inline std::string format_sci(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.2E", value);
  std::string s(buffer);
  // Trim the exponent to table style: 5.89E-04 -> 5.89E-4, 1.00E+00 -> 1.00E0.
  const auto e = s.find('E');
  if (e != std::string::npos && e + 1 < s.size()) {
    std::size_t digits = e + 1;
    if (s[digits] == '+') {
      s.erase(digits, 1);
    } else if (s[digits] == '-') {
      ++digits;
    }
    while (digits + 1 < s.size() && s[digits] == '0') {
      s.erase(digits, 1);
    }
  }
  return s;
}

inline std::string format_value(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return std::string(buffer);
}

// Writes to <path>.tmp first, then renames into place, so an interrupted
// run never leaves a partially-written final file.
inline void write_atomically(const std::filesystem::path& path,
                             const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline constexpr const char* kResultsHeader =
    "sweep_param,sweep_value,trial,method,metric,value\n";

inline void append_result_rows(std::ostringstream& out,
                               const std::string& sweep_param,
                               const std::string& sweep_value,
                               const eval::ExperimentResult& result) {
  std::size_t trials = 0;
  for (const auto& row : result.rows) {
    trials = std::max(trials, row.per_trial.size());
  }
  // Merge order: trial-major, then method/metric in table order.
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (const auto& row : result.rows) {
      if (trial >= row.per_trial.size()) continue;
      out << sweep_param << ',' << sweep_value << ',' << trial << ','
          << row.method << ',' << row.metric << ','
          << format_value(row.per_trial[trial]) << '\n';
    }
  }
}

// Long-form results.csv: one row per (trial, method, metric).
inline void write_results_csv(const std::filesystem::path& path,
                              const eval::ExperimentResult& result) {
  std::ostringstream out;
  out << kResultsHeader;
  append_result_rows(out, "", "", result);
  write_atomically(path, out.str());
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const eval::SweepResult& sweep) {
  std::ostringstream out;
  out << kResultsHeader;
  const std::string param = eval::sweep_parameter_name(sweep.parameter);
  for (const auto& point : sweep.points) {
    append_result_rows(out, param, format_value(point.value), point.result);
  }
  write_atomically(path, out.str());
}

// Per-method means, plus enough configuration echo to identify the run.
inline nlohmann::json summary_json(const eval::ExperimentConfig& config,
                                   const eval::ExperimentResult& result) {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& row : result.rows) {
    auto& entry = methods[row.method];
    if (std::isnan(row.mean)) {
      entry[row.metric] = nullptr;
    } else {
      entry[row.metric] = row.mean;
    }
  }
  nlohmann::json doc;
  doc["methods"] = std::move(methods);
  doc["protocol"] = ldp::protocol_name(config.protocol);
  doc["epsilon"] = config.epsilon;
  doc["attack"] = eval::attack_name(config.attack);
  doc["beta"] = config.beta;
  doc["eta"] = config.eta;
  doc["trials"] = config.trials;
  doc["seed"] = config.seed;
  return doc;
}

inline void write_summary_json(const std::filesystem::path& path,
                               const eval::ExperimentConfig& config,
                               const eval::ExperimentResult& result) {
  write_atomically(path, summary_json(config, result).dump(2) + "\n");
}

// Trial-0 per-item view consumed by the inspect subcommand.
inline void write_frequencies_csv(const std::filesystem::path& path,
                                  const eval::TrialDiagnostics& diag) {
  std::ostringstream out;
  out << "item,true,genuine_agg,poisoned,recovered\n";
  for (std::size_t v = 0; v < diag.f_true.size(); ++v) {
    out << v << ',' << format_value(diag.f_true[v]) << ','
        << format_value(diag.genuine_agg[v]) << ','
        << format_value(diag.poisoned[v]) << ','
        << format_value(diag.recovered[v]) << '\n';
  }
  write_atomically(path, out.str());
}

inline void write_recovery_json(const std::filesystem::path& path,
                                const eval::TrialDiagnostics& diag) {
  nlohmann::json doc = recover::recovery_result_to_json(diag.recovery);
  doc["targets"] = diag.targets;
  write_atomically(path, doc.dump(2) + "\n");
}

// Human-readable method table: 3 significant digits in scientific notation.
inline std::string format_table(const eval::ExperimentResult& result) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %12s %12s\n", "method", "MSE", "FG");
  out << line;
  const std::vector<std::string> order = {
      eval::kMethodPoisoned, eval::kMethodRecover, eval::kMethodRecoverStar,
      eval::kMethodDetection};
  for (const auto& method : order) {
    const auto* mse_row = result.find(method, "mse");
    if (mse_row == nullptr) continue;
    const auto* fg_row = result.find(method, "fg");
    std::snprintf(line, sizeof(line), "%-12s %12s %12s\n", method.c_str(),
                  format_sci(mse_row->mean).c_str(),
                  fg_row != nullptr ? format_sci(fg_row->mean).c_str() : "-");
    out << line;
  }
  return out.str();
}

}  // namespace ldpr::output

#endif  // LDPR_OUTPUT_HPP_
