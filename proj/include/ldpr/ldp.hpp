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

#ifndef LDPR_LDP_HPP_
#define LDPR_LDP_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ldpr/core.hpp"
#include "ldpr/rng.hpp"

namespace ldpr::ldp {

enum class Protocol { kGrr, kOue, kOlh };

inline std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kGrr: return "grr";
    case Protocol::kOue: return "oue";
    case Protocol::kOlh: return "olh";
  }
  throw std::logic_error("unknown protocol");
}

inline Protocol protocol_from_name(const std::string& name) {
  if (name == "grr") return Protocol::kGrr;
  if (name == "oue") return Protocol::kOue;
  if (name == "olh") return Protocol::kOlh;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

// Perturbation probabilities of one protocol instance. p is the probability
// of the truth-supporting outcome, q of any non-supporting one; always
// 0 < q < p < 1.
struct PerturbParams {
  Protocol protocol;
  double epsilon = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::uint32_t domain_size = 0;
  std::uint32_t g = 0;  // OLH hash range; unused otherwise.

  // GRR: p = e^eps / (d - 1 + e^eps), q = 1 / (d - 1 + e^eps).
  static PerturbParams grr(const ItemDomain& domain, double epsilon) {
    check_epsilon(epsilon);
    PerturbParams out;
    out.protocol = Protocol::kGrr;
    out.epsilon = epsilon;
    out.domain_size = domain.size;
    const double e = std::exp(epsilon);
    const double denom = static_cast<double>(domain.size) - 1.0 + e;
    out.p = e / denom;
    out.q = 1.0 / denom;
    return out;
  }

  // OUE: p = 1/2, q = 1 / (e^eps + 1).
  static PerturbParams oue(const ItemDomain& domain, double epsilon) {
    check_epsilon(epsilon);
    PerturbParams out;
    out.protocol = Protocol::kOue;
    out.epsilon = epsilon;
    out.domain_size = domain.size;
    out.p = 0.5;
    out.q = 1.0 / (std::exp(epsilon) + 1.0);
    return out;
  }

  // OLH: GRR on the hashed range {0..g-1}, default g = ceil(e^eps + 1).
  static PerturbParams olh(const ItemDomain& domain, double epsilon,
                           std::uint32_t g = 0) {
    check_epsilon(epsilon);
    PerturbParams out;
    out.protocol = Protocol::kOlh;
    out.epsilon = epsilon;
    out.domain_size = domain.size;
    const double e = std::exp(epsilon);
    out.g = g != 0 ? g : static_cast<std::uint32_t>(std::ceil(e + 1.0));
    if (out.g < 2) throw std::invalid_argument("OLH hash range must be >= 2");
    out.p = e / (e + static_cast<double>(out.g) - 1.0);
    out.q = 1.0 / static_cast<double>(out.g);
    return out;
  }

  static PerturbParams make(Protocol protocol, const ItemDomain& domain,
                            double epsilon, std::uint32_t g = 0) {
    switch (protocol) {
      case Protocol::kGrr: return grr(domain, epsilon);
      case Protocol::kOue: return oue(domain, epsilon);
      case Protocol::kOlh: return olh(domain, epsilon, g);
    }
    throw std::logic_error("unknown protocol");
  }

 private:
  static void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("epsilon must be positive and finite");
    }
  }
};

// Keyed hash behind OLH: deterministic, uniform over 0..g-1 across seeds,
// independent-looking across distinct items. The per-report random seed
// plays the role of picking a hash function from the family.
inline std::uint32_t olh_hash(std::uint64_t seed, std::uint32_t item,
                              std::uint32_t g) {
  if (g < 2) throw std::invalid_argument("hash range must be >= 2");
  const std::uint64_t mixed =
      mix64(seed ^ mix64(static_cast<std::uint64_t>(item) +
                         0x7f4a7c15f39cc060ull));
  return static_cast<std::uint32_t>(mixed % g);
}

struct GrrReport {
  std::uint32_t item = 0;
};

// Perturbed unary encoding, bit-packed. bit(v) == 1 means the report
// supports item v.
struct OueReport {
  std::uint32_t num_bits = 0;
  std::vector<std::uint64_t> words;

  explicit OueReport(std::uint32_t d)
      : num_bits(d), words((d + 63) / 64, 0) {}

  bool bit(std::uint32_t i) const {
    return (words[i >> 6] >> (i & 63)) & 1ull;
  }
  void set_bit(std::uint32_t i) { words[i >> 6] |= 1ull << (i & 63); }
};

struct OlhReport {
  std::uint64_t seed = 0;
  std::uint32_t value = 0;
};

using Report = std::variant<GrrReport, OueReport, OlhReport>;
using ReportList = std::vector<Report>;

// Applies the protocol's perturbation to one item.
inline Report perturb(const PerturbParams& params, std::uint32_t item,
                      Rng& rng) {
  if (item >= params.domain_size) {
    throw std::invalid_argument("item out of domain");
  }
  switch (params.protocol) {
    case Protocol::kGrr: {
      if (rng.bernoulli(params.p)) return GrrReport{item};
      // Uniform over the d-1 other items.
      auto other = static_cast<std::uint32_t>(
          rng.below(params.domain_size - 1));
      if (other >= item) ++other;
      return GrrReport{other};
    }
    case Protocol::kOue: {
      OueReport report(params.domain_size);
      for (std::uint32_t i = 0; i < params.domain_size; ++i) {
        const double keep = (i == item) ? params.p : params.q;
        if (rng.bernoulli(keep)) report.set_bit(i);
      }
      return report;
    }
    case Protocol::kOlh: {
      OlhReport report;
      report.seed = rng.next_u64();
      const std::uint32_t hashed = olh_hash(report.seed, item, params.g);
      // GRR on {0..g-1} applied to the hashed value.
      if (rng.bernoulli(params.p)) {
        report.value = hashed;
      } else {
        auto other = static_cast<std::uint32_t>(rng.below(params.g - 1));
        if (other >= hashed) ++other;
        report.value = other;
      }
      return report;
    }
  }
  throw std::logic_error("unknown protocol");
}

// True iff `item` lies in the report's support set, i.e. the report's
// encoded value could have been produced by `item`.
inline bool supports(const PerturbParams& params, const Report& report,
                     std::uint32_t item) {
  if (const auto* grr = std::get_if<GrrReport>(&report)) {
    return grr->item == item;
  }
  if (const auto* oue = std::get_if<OueReport>(&report)) {
    if (item >= oue->num_bits) throw std::invalid_argument("item out of domain");
    return oue->bit(item);
  }
  const auto& olh = std::get<OlhReport>(report);
  return olh_hash(olh.seed, item, params.g) == olh.value;
}

// Unbiased estimated counts per item: (C(v) - N q) / (p - q), where C(v) is
// the number of reports supporting v. support_counts keeps the raw integer
// C(v) so that linearity checks can be exact.
struct AggregateEstimate {
  std::vector<std::int64_t> support_counts;
  std::vector<double> counts;
  std::size_t n_reports = 0;

  FrequencyVector frequencies() const {
    FrequencyVector out(counts.size());
    const double n = static_cast<double>(n_reports);
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / n;
    return out;
  }
};

inline AggregateEstimate aggregate(const PerturbParams& params,
                                   std::span<const Report> reports) {
  if (reports.empty()) throw std::invalid_argument("empty report list");
  const std::uint32_t d = params.domain_size;
  std::vector<std::int64_t> support(d, 0);
  switch (params.protocol) {
    case Protocol::kGrr:
      for (const auto& r : reports) {
        const auto& grr = std::get<GrrReport>(r);
        if (grr.item >= d) throw std::invalid_argument("report out of domain");
        ++support[grr.item];
      }
      break;
    case Protocol::kOue:
      for (const auto& r : reports) {
        const auto& oue = std::get<OueReport>(r);
        if (oue.num_bits != d) throw std::invalid_argument("report width mismatch");
        for (std::size_t w = 0; w < oue.words.size(); ++w) {
          std::uint64_t bits = oue.words[w];
          while (bits != 0) {
            const int b = __builtin_ctzll(bits);
            ++support[w * 64 + static_cast<std::size_t>(b)];
            bits &= bits - 1;
          }
        }
      }
      break;
    case Protocol::kOlh:
      for (const auto& r : reports) {
        const auto& olh = std::get<OlhReport>(r);
        if (olh.value >= params.g) throw std::invalid_argument("report value out of range");
        for (std::uint32_t v = 0; v < d; ++v) {
          if (olh_hash(olh.seed, v, params.g) == olh.value) ++support[v];
        }
      }
      break;
  }

  AggregateEstimate out;
  out.n_reports = reports.size();
  out.support_counts = std::move(support);
  out.counts.resize(d);
  const double n = static_cast<double>(out.n_reports);
  const double scale = params.p - params.q;
  for (std::uint32_t v = 0; v < d; ++v) {
    out.counts[v] =
        (static_cast<double>(out.support_counts[v]) - n * params.q) / scale;
  }
  return out;
}

inline AggregateEstimate aggregate(const PerturbParams& params,
                                   const ReportList& reports) {
  return aggregate(params, std::span<const Report>(reports));
}

// Debug/fixture serialization:
//   {"grr": idx} | {"oue": "bitstring"} | {"olh": {"seed": u64, "val": u8}}
inline nlohmann::json report_to_json(const Report& report) {
  if (const auto* grr = std::get_if<GrrReport>(&report)) {
    return {{"grr", grr->item}};
  }
  if (const auto* oue = std::get_if<OueReport>(&report)) {
    std::string bits(oue->num_bits, '0');
    for (std::uint32_t i = 0; i < oue->num_bits; ++i) {
      if (oue->bit(i)) bits[i] = '1';
    }
    return {{"oue", bits}};
  }
  const auto& olh = std::get<OlhReport>(report);
  return {{"olh", {{"seed", olh.seed}, {"val", olh.value}}}};
}

inline Report report_from_json(const nlohmann::json& j) {
  if (j.contains("grr")) return GrrReport{j.at("grr").get<std::uint32_t>()};
  if (j.contains("oue")) {
    const auto bits = j.at("oue").get<std::string>();
    OueReport report(static_cast<std::uint32_t>(bits.size()));
    for (std::uint32_t i = 0; i < report.num_bits; ++i) {
      if (bits[i] == '1') report.set_bit(i);
    }
    return report;
  }
  if (j.contains("olh")) {
    const auto& inner = j.at("olh");
    return OlhReport{inner.at("seed").get<std::uint64_t>(),
                     inner.at("val").get<std::uint32_t>()};
  }
  throw std::invalid_argument("unrecognized report JSON");
}

}  // namespace ldpr::ldp

#endif  // LDPR_LDP_HPP_
