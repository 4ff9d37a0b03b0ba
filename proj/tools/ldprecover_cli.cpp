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

// Command-line front end: generate datasets, run experiments, run parameter
// sweeps, and inspect run artifacts.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ldpr/ldprecover.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_output_dir() {
  if (const char* env = std::getenv("LDPRECOVER_OUT")) return fs::path(env);
  return fs::path(".");
}

// Parses "d=102,n=389894,s=1.1" into a Zipf dataset spec.
ldpr::eval::DatasetSpec parse_zipf_spec(const std::string& text) {
  ldpr::eval::DatasetSpec spec;
  spec.source = ldpr::eval::DatasetSpec::Source::kZipf;
  std::stringstream stream(text);
  std::string part;
  bool have_d = false, have_n = false;
  while (std::getline(stream, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw UsageError("bad --zipf component '" + part + "', expected key=value");
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    try {
      if (key == "d") {
        spec.d = static_cast<std::uint32_t>(std::stoul(value));
        have_d = true;
      } else if (key == "n") {
        spec.n = static_cast<std::size_t>(std::stoull(value));
        have_n = true;
      } else if (key == "s") {
        spec.s = std::stod(value);
      } else {
        throw UsageError("unknown --zipf key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw UsageError("bad --zipf value '" + value + "' for key " + key);
    } catch (const std::out_of_range&) {
      throw UsageError("out-of-range --zipf value '" + value + "'");
    }
  }
  if (!have_d || !have_n) throw UsageError("--zipf requires at least d= and n=");
  return spec;
}

void print_top_frequencies(const ldpr::Dataset& data, std::size_t top) {
  const auto freq = ldpr::true_frequencies(data);
  std::vector<std::uint32_t> order(freq.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return freq[a] > freq[b];
  });
  std::cout << "n=" << data.user_count() << " d=" << data.domain.size << "\n";
  std::cout << "top items:\n";
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    std::cout << "  item " << order[i] << "  f="
              << ldpr::output::format_sci(freq[order[i]]) << "\n";
  }
}

void write_labels_json(const ldpr::Dataset& data, const fs::path& path) {
  if (data.labels.empty()) return;
  nlohmann::json doc = nlohmann::json::object();
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    doc[std::to_string(i)] = data.labels[i];
  }
  ldpr::output::write_atomically(path, doc.dump(2) + "\n");
}

int cmd_gen_data(const std::string& zipf_spec, const std::string& from_csv,
                 std::uint64_t seed, const std::string& out_path) {
  if (zipf_spec.empty() == from_csv.empty()) {
    throw UsageError("gen-data needs exactly one of --zipf or --from");
  }
  if (zipf_spec.empty()) {
    const auto data = ldpr::load_dataset(from_csv);
    ldpr::save_dataset(data, out_path);
    write_labels_json(data, out_path + ".labels.json");
    print_top_frequencies(data, 5);
  } else {
    const auto spec = parse_zipf_spec(zipf_spec);
    const auto data = ldpr::synthesize_zipf(ldpr::ItemDomain(spec.d), spec.n,
                                            spec.s, seed);
    ldpr::save_dataset(data, out_path);
    print_top_frequencies(data, 5);
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

ldpr::eval::ExperimentConfig load_and_override(
    const std::string& config_path, std::optional<std::uint64_t> seed,
    std::optional<std::size_t> jobs) {
  auto config = ldpr::config::load_config(config_path);
  if (seed) config.seed = *seed;
  if (jobs) config.jobs = *jobs;
  return config;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed, std::optional<std::size_t> jobs,
            bool verbose) {
  const auto config = load_and_override(config_path, seed, jobs);
  fs::create_directories(out_dir);
  if (verbose) {
    std::cout << "protocol=" << ldpr::ldp::protocol_name(config.protocol)
              << " epsilon=" << config.epsilon
              << " attack=" << ldpr::eval::attack_name(config.attack)
              << " beta=" << config.beta << " eta=" << config.eta
              << " trials=" << config.trials << " seed=" << config.seed
              << "\n";
  }
  const auto result = ldpr::eval::run_experiment(config);
  ldpr::output::write_results_csv(out_dir / "results.csv", result);
  ldpr::output::write_summary_json(out_dir / "summary.json", config, result);
  ldpr::output::write_frequencies_csv(out_dir / "frequencies.csv",
                                      result.diagnostics);
  ldpr::output::write_recovery_json(out_dir / "recovery.json",
                                    result.diagnostics);
  if (config.dataset.source == ldpr::eval::DatasetSpec::Source::kFile) {
    const auto data = ldpr::load_dataset(config.dataset.path);
    write_labels_json(data, out_dir / "labels.json");
  }
  std::cout << ldpr::output::format_table(result);
  std::cout << "wrote " << (out_dir / "results.csv").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir,
              std::optional<std::uint64_t> seed,
              std::optional<std::size_t> jobs) {
  const auto config = load_and_override(config_path, seed, jobs);
  if (!config.sweep) {
    throw UsageError("sweep requires a [sweep] section in the config");
  }
  fs::create_directories(out_dir);
  const auto sweep = ldpr::eval::run_sweep(config);
  ldpr::output::write_sweep_csv(out_dir / "results.csv", sweep);
  const std::string param = ldpr::eval::sweep_parameter_name(sweep.parameter);
  for (const auto& point : sweep.points) {
    std::cout << param << "=" << point.value << "\n";
    std::cout << ldpr::output::format_table(point.result);
  }
  std::cout << "wrote " << (out_dir / "results.csv").string() << "\n";
  return kExitOk;
}

struct FrequencyRow {
  std::uint32_t item;
  double truth;
  double genuine;
  double poisoned;
  double recovered;
};

int cmd_inspect(const fs::path& dir, std::size_t top) {
  const fs::path freq_path = dir / "frequencies.csv";
  const fs::path recovery_path = dir / "recovery.json";
  if (!fs::exists(dir) || !fs::exists(freq_path) || !fs::exists(recovery_path)) {
    throw UsageError("missing run artifacts under " + dir.string());
  }

  std::ifstream in(freq_path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<FrequencyRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FrequencyRow row{};
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    row.item = static_cast<std::uint32_t>(std::stoul(field));
    std::getline(ss, field, ',');
    row.truth = std::stod(field);
    std::getline(ss, field, ',');
    row.genuine = std::stod(field);
    std::getline(ss, field, ',');
    row.poisoned = std::stod(field);
    std::getline(ss, field, ',');
    row.recovered = std::stod(field);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.truth > b.truth;
  });

  std::printf("%-8s %12s %12s %12s\n", "item", "true", "poisoned", "recovered");
  for (std::size_t i = 0; i < std::min(top, rows.size()); ++i) {
    const auto& r = rows[i];
    std::printf("%-8u %12s %12s %12s\n", r.item,
                ldpr::output::format_sci(r.truth).c_str(),
                ldpr::output::format_sci(r.poisoned).c_str(),
                ldpr::output::format_sci(r.recovered).c_str());
  }

  std::ifstream rec_in(recovery_path);
  nlohmann::json recovery;
  rec_in >> recovery;
  std::cout << "zeroed set (" << recovery.at("zeroed").size() << " items): ";
  for (const auto& v : recovery.at("zeroed")) std::cout << v << " ";
  std::cout << "\niterations: " << recovery.at("iterations") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDP frequency estimation, poisoning attacks, and recovery"};
  app.require_subcommand(1);

  std::string zipf_spec;
  std::string from_csv;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate or convert a dataset");
  gen->add_option("--zipf", zipf_spec, "Zipf spec, e.g. d=102,n=389894,s=1.1");
  gen->add_option("--from", from_csv, "convert an existing dataset file");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output dataset path")->required();

  std::string run_config;
  std::string run_out = default_output_dir().string();
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_jobs;
  bool run_verbose = false;
  auto* run = app.add_subcommand("run", "run one experiment from a config");
  run->add_option("--config", run_config, "experiment config (.toml or .json)")
      ->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--seed", run_seed, "override run.seed");
  run->add_option("--jobs", run_jobs, "parallel trial workers");
  run->add_flag("--verbose", run_verbose, "echo the effective settings");

  std::string sweep_config;
  std::string sweep_out = default_output_dir().string();
  std::optional<std::uint64_t> sweep_seed;
  std::optional<std::size_t> sweep_jobs;
  auto* sweep = app.add_subcommand("sweep", "run a one-parameter sweep");
  sweep->add_option("--config", sweep_config, "sweep config (.toml or .json)")
      ->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--seed", sweep_seed, "override run.seed");
  sweep->add_option("--jobs", sweep_jobs, "parallel trial workers");

  std::string inspect_dir;
  std::size_t inspect_top = 10;
  auto* inspect = app.add_subcommand("inspect", "inspect a prior run's output");
  inspect->add_option("--dir", inspect_dir, "run output directory")->required();
  inspect->add_option("--top", inspect_top, "number of items to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(zipf_spec, from_csv, gen_seed, gen_out);
    if (run->parsed()) {
      return cmd_run(run_config, run_out, run_seed, run_jobs, run_verbose);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_out, sweep_seed, sweep_jobs);
    }
    if (inspect->parsed()) return cmd_inspect(inspect_dir, inspect_top);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
