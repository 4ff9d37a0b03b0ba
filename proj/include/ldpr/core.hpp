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

#ifndef LDPR_CORE_HPP_
#define LDPR_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ldpr/rng.hpp"

namespace ldpr {

// Finite input domain. Items are dense indices 0..size-1, stable for the
// lifetime of an experiment.
struct ItemDomain {
  std::uint32_t size = 0;

  explicit ItemDomain(std::uint32_t d) : size(d) {
    if (d < 2) throw std::invalid_argument("domain size must be at least 2");
  }
};

// One value per genuine user, every value inside the domain.
struct Dataset {
  ItemDomain domain;
  std::vector<std::uint32_t> values;
  // Present when the source file used string item labels; labels[i] is the
  // label mapped to index i (first-appearance order).
  std::vector<std::string> labels;

  Dataset(ItemDomain d, std::vector<std::uint32_t> vals)
      : domain(d), values(std::move(vals)) {
    if (values.empty()) throw std::invalid_argument("empty dataset");
    for (auto v : values) {
      if (v >= domain.size) throw std::invalid_argument("item out of domain");
    }
  }

  std::size_t user_count() const { return values.size(); }
};

// Length-d vector of per-item frequencies. Estimated/poisoned/recovered
// vectors may carry negative entries until refined; a true-frequency vector
// is nonnegative and sums to 1.
struct FrequencyVector {
  std::vector<double> values;

  FrequencyVector() = default;
  explicit FrequencyVector(std::size_t d) : values(d, 0.0) {}
  explicit FrequencyVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double sum() const {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
};

inline void check_same_domain(const FrequencyVector& a,
                              const FrequencyVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("domain mismatch");
}

// Exact per-item frequencies of the raw (unperturbed) data.
inline FrequencyVector true_frequencies(const Dataset& data) {
  if (data.values.empty()) throw std::invalid_argument("empty dataset");
  FrequencyVector freq(data.domain.size);
  for (auto v : data.values) freq[v] += 1.0;
  const double n = static_cast<double>(data.values.size());
  for (auto& f : freq.values) f /= n;
  return freq;
}

// n i.i.d. draws from Zipf(s) truncated to the domain: P(i) proportional to
// 1/(i+1)^s. Deterministic under the seed.
inline Dataset synthesize_zipf(ItemDomain domain, std::size_t n, double s,
                               std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("user count must be at least 1");
  if (!(s > 0.0)) throw std::invalid_argument("Zipf exponent must be positive");
  std::vector<double> cdf(domain.size);
  double total = 0.0;
  for (std::uint32_t i = 0; i < domain.size; ++i) {
    total += std::pow(static_cast<double>(i) + 1.0, -s);
    cdf[i] = total;
  }
  for (auto& c : cdf) c /= total;
  cdf.back() = 1.0;

  Rng rng(seed);
  std::vector<std::uint32_t> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    values[i] = static_cast<std::uint32_t>(it - cdf.begin());
  }
  return Dataset(domain, std::move(values));
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  std::uint64_t value = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  out = value;
  return true;
}

}  // namespace detail

// Reads a dataset file: either one item index per line, or CSV with header
// "item,count". Lines starting with '#' are comments; "# d=N" pins the
// domain size. With a domain-size hint, indices >= hint are rejected;
// otherwise d = max index + 1. Counted CSVs may use string labels, which are
// mapped to indices in first-appearance order.
inline Dataset load_dataset(const std::string& path,
                            std::optional<std::uint32_t> domain_hint = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::vector<std::uint32_t> values;
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::uint32_t> label_index;
  std::uint32_t max_index = 0;
  std::optional<std::uint32_t> declared_d;
  bool counted_form = false;
  bool saw_header = false;
  bool saw_numeric_item = false;

  auto fail = [&](std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                             what);
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = detail::trim(line.substr(1));
      if (body.rfind("d=", 0) == 0) {
        std::uint64_t d = 0;
        if (detail::parse_u64(detail::trim(body.substr(2)), d) && d >= 2) {
          declared_d = static_cast<std::uint32_t>(d);
        }
      }
      continue;
    }
    if (!saw_header && line.find(',') != std::string::npos) {
      std::string lowered = line;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      lowered.erase(std::remove_if(lowered.begin(), lowered.end(),
                                   [](unsigned char c) { return c == ' '; }),
                    lowered.end());
      if (lowered == "item,count") {
        counted_form = true;
        saw_header = true;
        continue;
      }
    }
    saw_header = true;

    if (counted_form) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) fail(line_no, "expected item,count row");
      const std::string item_str = detail::trim(line.substr(0, comma));
      const std::string count_str = detail::trim(line.substr(comma + 1));
      std::uint64_t count = 0;
      if (!detail::parse_u64(count_str, count)) {
        fail(line_no, "malformed count '" + count_str + "'");
      }
      std::uint32_t index = 0;
      std::uint64_t parsed = 0;
      if (detail::parse_u64(item_str, parsed)) {
        if (!labels.empty()) fail(line_no, "mixed labeled and numeric items");
        if (parsed > 0xffffffffull) fail(line_no, "item index too large");
        index = static_cast<std::uint32_t>(parsed);
        saw_numeric_item = true;
      } else if (!item_str.empty()) {
        if (saw_numeric_item) fail(line_no, "mixed labeled and numeric items");
        auto [it, inserted] = label_index.try_emplace(
            item_str, static_cast<std::uint32_t>(labels.size()));
        if (inserted) labels.push_back(item_str);
        index = it->second;
      } else {
        fail(line_no, "empty item field");
      }
      if (domain_hint && index >= *domain_hint) fail(line_no, "item out of domain");
      max_index = std::max(max_index, index);
      for (std::uint64_t k = 0; k < count; ++k) values.push_back(index);
    } else {
      std::uint64_t parsed = 0;
      if (!detail::parse_u64(line, parsed) || parsed > 0xffffffffull) {
        fail(line_no, "malformed item index '" + line + "'");
      }
      const auto index = static_cast<std::uint32_t>(parsed);
      if (domain_hint && index >= *domain_hint) fail(line_no, "item out of domain");
      max_index = std::max(max_index, index);
      values.push_back(index);
    }
  }
  if (values.empty()) throw std::runtime_error(path + ": empty dataset");

  std::uint32_t d = max_index + 1;
  if (declared_d) d = std::max(d, *declared_d);
  if (domain_hint) d = std::max(d, *domain_hint);
  d = std::max<std::uint32_t>(d, 2);
  Dataset data(ItemDomain(d), std::move(values));
  data.labels = std::move(labels);
  return data;
}

// Writes one item index per line, preceded by a "# d=N" directive so that
// load_dataset round-trips domains wider than max index + 1.
inline void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << "# d=" << data.domain.size << "\n";
  for (auto v : data.values) out << v << "\n";
  if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

}  // namespace ldpr

#endif  // LDPR_CORE_HPP_
