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

#ifndef LDPR_CONFIG_HPP_
#define LDPR_CONFIG_HPP_

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldpr/eval.hpp"

namespace ldpr::config {

// Experiment configs are TOML (subset: [section], key = value, scalars and
// flat arrays) or JSON with the same two-level shape. Unknown keys are hard
// errors; a silent typo in epsilon/beta/eta would invalidate an experiment.

namespace detail {

struct TomlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline nlohmann::json parse_toml_scalar(const std::string& token,
                                        std::size_t line_no) {
  const std::string value = ldpr::detail::trim(token);
  if (value.empty()) {
    throw TomlError("line " + std::to_string(line_no) + ": missing value");
  }
  if (value.front() == '"') {
    if (value.size() < 2 || value.back() != '"') {
      throw TomlError("line " + std::to_string(line_no) +
                      ": unterminated string");
    }
    return value.substr(1, value.size() - 2);
  }
  if (value == "true") return true;
  if (value == "false") return false;
  try {
    std::size_t used = 0;
    if (value.find_first_of(".eE") == std::string::npos ||
        (value.size() > 1 && value.rfind("0x", 0) == 0)) {
      const long long integer = std::stoll(value, &used);
      if (used == value.size()) return integer;
    }
    const double real = std::stod(value, &used);
    if (used == value.size()) return real;
  } catch (const std::exception&) {
  }
  throw TomlError("line " + std::to_string(line_no) + ": cannot parse value '" +
                  value + "'");
}

inline nlohmann::json parse_toml_value(const std::string& token,
                                       std::size_t line_no) {
  const std::string value = ldpr::detail::trim(token);
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') {
      throw TomlError("line " + std::to_string(line_no) +
                      ": unterminated array");
    }
    nlohmann::json array = nlohmann::json::array();
    const std::string body = value.substr(1, value.size() - 2);
    std::string element;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!ldpr::detail::trim(element).empty()) {
          array.push_back(parse_toml_scalar(element, line_no));
        }
        element.clear();
      } else {
        element += c;
      }
    }
    if (!ldpr::detail::trim(element).empty()) {
      array.push_back(parse_toml_scalar(element, line_no));
    }
    return array;
  }
  return parse_toml_scalar(value, line_no);
}

}  // namespace detail

// Parses the supported TOML subset into a two-level JSON object.
inline nlohmann::json parse_toml(std::istream& in) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ldpr::detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw detail::TomlError("line " + std::to_string(line_no) +
                                ": unterminated section header");
      }
      const std::string name = ldpr::detail::trim(line.substr(1, line.size() - 2));
      if (name.empty()) {
        throw detail::TomlError("line " + std::to_string(line_no) +
                                ": empty section name");
      }
      section = &root[name];
      if (!section->is_object()) *section = nlohmann::json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw detail::TomlError("line " + std::to_string(line_no) +
                              ": expected key = value");
    }
    const std::string key = ldpr::detail::trim(line.substr(0, eq));
    if (key.empty()) {
      throw detail::TomlError("line " + std::to_string(line_no) +
                              ": empty key");
    }
    (*section)[key] = detail::parse_toml_value(line.substr(eq + 1), line_no);
  }
  return root;
}

inline nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_toml(in);
}

namespace detail {

class SectionReader {
 public:
  SectionReader(const nlohmann::json& section, std::string prefix)
      : section_(section), prefix_(std::move(prefix)) {}

  ~SectionReader() = default;

  bool has(const std::string& key) {
    seen_.push_back(key);
    return section_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = section_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config field " + prefix_ + "." + key +
                                  " has the wrong type");
    }
  }

  void read_string(const std::string& key, std::string& out) { read(key, out); }

  // Every key present in the section must have been declared via has/read.
  void finish() const {
    for (auto it = section_.begin(); it != section_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw std::invalid_argument("unknown config key: " + prefix_ + "." +
                                    it.key());
      }
    }
  }

 private:
  const nlohmann::json& section_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

}  // namespace detail

// Materializes an ExperimentConfig from the parsed two-level document,
// rejecting unknown sections and keys with their field paths.
inline eval::ExperimentConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config root must be a table");
  eval::ExperimentConfig config;

  static const std::vector<std::string> known_sections = {
      "dataset", "protocol", "attack", "recovery", "run", "sweep"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(known_sections.begin(), known_sections.end(), it.key()) ==
        known_sections.end()) {
      throw std::invalid_argument("unknown config section: " + it.key());
    }
    if (!it.value().is_object()) {
      throw std::invalid_argument("config section " + it.key() +
                                  " must be a table");
    }
  }

  if (doc.contains("dataset")) {
    detail::SectionReader section(doc.at("dataset"), "dataset");
    std::string source = "zipf";
    section.read_string("source", source);
    if (source == "zipf") {
      config.dataset.source = eval::DatasetSpec::Source::kZipf;
    } else if (source == "file") {
      config.dataset.source = eval::DatasetSpec::Source::kFile;
    } else {
      throw std::invalid_argument("dataset.source must be 'zipf' or 'file'");
    }
    section.read_string("path", config.dataset.path);
    std::int64_t d = config.dataset.d;
    std::int64_t n = static_cast<std::int64_t>(config.dataset.n);
    section.read("d", d);
    section.read("n", n);
    section.read("s", config.dataset.s);
    if (d < 2) throw std::invalid_argument("dataset.d must be >= 2");
    if (n < 1) throw std::invalid_argument("dataset.n must be >= 1");
    config.dataset.d = static_cast<std::uint32_t>(d);
    config.dataset.n = static_cast<std::size_t>(n);
    section.finish();
    if (config.dataset.source == eval::DatasetSpec::Source::kFile &&
        config.dataset.path.empty()) {
      throw std::invalid_argument("dataset.path is required for file source");
    }
  }

  if (doc.contains("protocol")) {
    detail::SectionReader section(doc.at("protocol"), "protocol");
    std::string name = ldp::protocol_name(config.protocol);
    section.read_string("name", name);
    config.protocol = ldp::protocol_from_name(name);
    section.read("epsilon", config.epsilon);
    std::int64_t g = config.g;
    section.read("g", g);
    if (g < 0) throw std::invalid_argument("protocol.g must be >= 0");
    config.g = static_cast<std::uint32_t>(g);
    section.finish();
  }

  if (doc.contains("attack")) {
    detail::SectionReader section(doc.at("attack"), "attack");
    std::string kind = eval::attack_name(config.attack);
    section.read_string("kind", kind);
    config.attack = eval::attack_from_name(kind);
    section.read("beta", config.beta);
    if (section.has("m")) {
      std::int64_t m = 0;
      section.read("m", m);
      if (m < 0) throw std::invalid_argument("attack.m must be >= 0");
      config.m = static_cast<std::size_t>(m);
    }
    std::int64_t r = config.r;
    section.read("r", r);
    if (r < 1) throw std::invalid_argument("attack.r must be >= 1");
    config.r = static_cast<std::uint32_t>(r);
    section.read("h_fraction", config.h_fraction);
    section.read("aa_alpha", config.aa_alpha);
    std::int64_t attackers = static_cast<std::int64_t>(config.attackers);
    section.read("attackers", attackers);
    if (attackers < 1) throw std::invalid_argument("attack.attackers must be >= 1");
    config.attackers = static_cast<std::size_t>(attackers);
    section.finish();
  }

  if (doc.contains("recovery")) {
    detail::SectionReader section(doc.at("recovery"), "recovery");
    section.read("eta", config.eta);
    section.read("paper_faithful_partial", config.paper_faithful_partial);
    section.read("tolerance", config.tolerance);
    section.finish();
  }

  if (doc.contains("run")) {
    detail::SectionReader section(doc.at("run"), "run");
    std::int64_t trials = static_cast<std::int64_t>(config.trials);
    section.read("trials", trials);
    if (trials < 1) throw std::invalid_argument("run.trials must be >= 1");
    config.trials = static_cast<std::size_t>(trials);
    std::int64_t seed = static_cast<std::int64_t>(config.seed);
    section.read("seed", seed);
    config.seed = static_cast<std::uint64_t>(seed);
    std::int64_t jobs = static_cast<std::int64_t>(config.jobs);
    section.read("jobs", jobs);
    if (jobs < 1) throw std::invalid_argument("run.jobs must be >= 1");
    config.jobs = static_cast<std::size_t>(jobs);
    section.finish();
  }

  if (doc.contains("sweep")) {
    detail::SectionReader section(doc.at("sweep"), "sweep");
    eval::SweepSpec sweep;
    std::string parameter;
    section.read_string("parameter", parameter);
    if (parameter == "beta") {
      sweep.parameter = eval::SweepParameter::kBeta;
    } else if (parameter == "epsilon") {
      sweep.parameter = eval::SweepParameter::kEpsilon;
    } else if (parameter == "eta") {
      sweep.parameter = eval::SweepParameter::kEta;
    } else {
      throw std::invalid_argument(
          "sweep.parameter must be one of beta, epsilon, eta");
    }
    section.read("values", sweep.values);
    section.finish();
    config.sweep = std::move(sweep);
  }

  config.validate();
  return config;
}

// Loads a config file, dispatching on the extension (.json vs TOML).
inline eval::ExperimentConfig load_config(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    return config_from_json(doc);
  }
  return config_from_json(parse_toml_file(path));
}

}  // namespace ldpr::config

#endif  // LDPR_CONFIG_HPP_
