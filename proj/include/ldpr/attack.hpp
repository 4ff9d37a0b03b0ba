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

#ifndef LDPR_ATTACK_HPP_
#define LDPR_ATTACK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ldpr/core.hpp"
#include "ldpr/ldp.hpp"
#include "ldpr/rng.hpp"

namespace ldpr::attack {

enum class AttackKind { kManip, kMga, kAdaptive, kMgaIpa };

// Attacker-designed report crafting: which attack, how many malicious users,
// and the per-kind parameters. Crafting never reads genuine user data; the
// attacker knows only the protocol and its parameters.
struct AttackSpec {
  AttackKind kind = AttackKind::kMga;
  std::size_t m = 0;
  double h_fraction = 1.0;             // Manip: fraction of D drawn into H.
  std::vector<std::uint32_t> targets;  // MGA / MGA-IPA.
  std::vector<double> distribution;    // Adaptive: sampling distribution.

  static AttackSpec manip(std::size_t m, double h_fraction) {
    if (!(h_fraction > 0.0) || h_fraction > 1.0) {
      throw std::invalid_argument("h_fraction must lie in (0, 1]");
    }
    AttackSpec spec;
    spec.kind = AttackKind::kManip;
    spec.m = m;
    spec.h_fraction = h_fraction;
    return spec;
  }

  static AttackSpec mga(std::size_t m, std::vector<std::uint32_t> targets) {
    if (targets.empty()) throw std::invalid_argument("target set is empty");
    AttackSpec spec;
    spec.kind = AttackKind::kMga;
    spec.m = m;
    spec.targets = std::move(targets);
    return spec;
  }

  static AttackSpec adaptive(std::size_t m, std::vector<double> distribution) {
    double total = 0.0;
    for (double p : distribution) {
      if (p < 0.0) throw std::invalid_argument("negative sampling probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("sampling distribution must sum to 1");
    }
    AttackSpec spec;
    spec.kind = AttackKind::kAdaptive;
    spec.m = m;
    spec.distribution = std::move(distribution);
    return spec;
  }

  static AttackSpec mga_ipa(std::size_t m, std::vector<std::uint32_t> targets) {
    AttackSpec spec = mga(m, std::move(targets));
    spec.kind = AttackKind::kMgaIpa;
    return spec;
  }
};

// Genuine and malicious reports as received by the server: Z = genuine ++
// malicious.
struct PoisonedReportSet {
  ldp::ReportList genuine;
  ldp::ReportList malicious;
  double eta_true = 0.0;  // m / n

  ldp::ReportList combined() const {
    ldp::ReportList all;
    all.reserve(genuine.size() + malicious.size());
    all.insert(all.end(), genuine.begin(), genuine.end());
    all.insert(all.end(), malicious.begin(), malicious.end());
    return all;
  }
};

// Converts the malicious fraction beta = m / (n + m) into a user count.
inline std::size_t malicious_count_for_beta(double beta, std::size_t n) {
  if (beta < 0.0 || beta >= 1.0) {
    throw std::invalid_argument("beta must lie in [0, 1)");
  }
  if (beta == 0.0) return 0;
  return static_cast<std::size_t>(
      std::ceil(beta * static_cast<double>(n) / (1.0 - beta)));
}

namespace detail {

// Emits one report carrying `item` directly in the encoded domain,
// bypassing perturbation. OLH reports pick a fresh random seed and hash the
// item so the report stays format-indistinguishable.
inline ldp::Report encode_direct(const ldp::PerturbParams& params,
                                 std::uint32_t item, Rng& rng) {
  switch (params.protocol) {
    case ldp::Protocol::kGrr:
      return ldp::GrrReport{item};
    case ldp::Protocol::kOue: {
      ldp::OueReport report(params.domain_size);
      report.set_bit(item);
      return report;
    }
    case ldp::Protocol::kOlh: {
      const std::uint64_t seed = rng.next_u64();
      return ldp::OlhReport{seed, ldp::olh_hash(seed, item, params.g)};
    }
  }
  throw std::logic_error("unknown protocol");
}

inline void check_targets(const std::vector<std::uint32_t>& targets,
                          std::uint32_t d) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  for (auto t : targets) {
    if (t >= d) throw std::invalid_argument("target out of domain");
  }
}

}  // namespace detail

// Untargeted attack: H is a uniform random sub-domain of size
// max(1, ceil(h_fraction * d)); each report encodes a uniform draw from H.
inline ldp::ReportList craft_manip(const ItemDomain& domain,
                                   const ldp::PerturbParams& params,
                                   std::size_t m, double h_fraction,
                                   Rng& rng) {
  if (!(h_fraction > 0.0) || h_fraction > 1.0) {
    throw std::invalid_argument("h_fraction must lie in (0, 1]");
  }
  const auto h_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(h_fraction * static_cast<double>(domain.size))));
  // Partial Fisher-Yates draw of H without replacement.
  std::vector<std::uint32_t> pool(domain.size);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t i = 0; i < h_size; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(h_size);

  ldp::ReportList reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng user = rng.child(i);
    const std::uint32_t item = pool[user.below(pool.size())];
    reports.push_back(detail::encode_direct(params, item, user));
  }
  return reports;
}

// Targeted attack: GRR reports draw uniformly from the target set; OUE
// reports set exactly the target bits (supporting all targets at once); OLH
// reports hash a uniform target under a fresh seed.
inline ldp::ReportList craft_mga(const ItemDomain& domain,
                                 const ldp::PerturbParams& params,
                                 std::size_t m,
                                 const std::vector<std::uint32_t>& targets,
                                 Rng& rng) {
  detail::check_targets(targets, domain.size);
  ldp::ReportList reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng user = rng.child(i);
    if (params.protocol == ldp::Protocol::kOue) {
      ldp::OueReport report(params.domain_size);
      for (auto t : targets) report.set_bit(t);
      reports.push_back(std::move(report));
    } else {
      const std::uint32_t item = targets[user.below(targets.size())];
      reports.push_back(detail::encode_direct(params, item, user));
    }
  }
  return reports;
}

// Adaptive attack: each report encodes an i.i.d. draw from the
// attacker-designed distribution over D. Manip and MGA-on-GRR are special
// cases of this sampling.
inline ldp::ReportList craft_adaptive(const ItemDomain& domain,
                                      const ldp::PerturbParams& params,
                                      std::size_t m,
                                      const std::vector<double>& distribution,
                                      Rng& rng) {
  if (distribution.size() != domain.size) {
    throw std::invalid_argument("distribution size does not match domain");
  }
  std::vector<double> cdf(distribution.size());
  double total = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    if (distribution[i] < 0.0) {
      throw std::invalid_argument("negative sampling probability");
    }
    total += distribution[i];
    cdf[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("sampling distribution must sum to 1");
  }
  cdf.back() = 1.0;

  ldp::ReportList reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng user = rng.child(i);
    const double u = user.uniform01();
    const auto item = static_cast<std::uint32_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    reports.push_back(detail::encode_direct(params, item, user));
  }
  return reports;
}

// Input-poisoning variant of MGA: the sampled target passes through the
// genuine perturbation mechanism instead of being sent verbatim.
inline ldp::ReportList craft_mga_ipa(const ItemDomain& domain,
                                     const ldp::PerturbParams& params,
                                     std::size_t m,
                                     const std::vector<std::uint32_t>& targets,
                                     Rng& rng) {
  detail::check_targets(targets, domain.size);
  ldp::ReportList reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng user = rng.child(i);
    const std::uint32_t item = targets[user.below(targets.size())];
    reports.push_back(ldp::perturb(params, item, user));
  }
  return reports;
}

inline ldp::ReportList craft(const ItemDomain& domain,
                             const ldp::PerturbParams& params,
                             const AttackSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case AttackKind::kManip:
      return craft_manip(domain, params, spec.m, spec.h_fraction, rng);
    case AttackKind::kMga:
      return craft_mga(domain, params, spec.m, spec.targets, rng);
    case AttackKind::kAdaptive:
      return craft_adaptive(domain, params, spec.m, spec.distribution, rng);
    case AttackKind::kMgaIpa:
      return craft_mga_ipa(domain, params, spec.m, spec.targets, rng);
  }
  throw std::logic_error("unknown attack kind");
}

// Multiple attackers: each crafts independently from its own substream; the
// server sees the concatenation.
inline ldp::ReportList compose_attacks(const ItemDomain& domain,
                                       const ldp::PerturbParams& params,
                                       const std::vector<AttackSpec>& specs,
                                       Rng& rng) {
  ldp::ReportList all;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Rng stream = rng.child(i);
    auto part = craft(domain, params, specs[i], stream);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

// Runs the full collection round: genuine users perturb their items (one
// independent substream per user), malicious reports are crafted per spec.
inline PoisonedReportSet poison(const Dataset& data,
                                const ldp::PerturbParams& params,
                                const AttackSpec& spec, Rng& rng) {
  PoisonedReportSet out;
  Rng genuine_stream = rng.child(0x67656e75696e65ull);
  out.genuine.reserve(data.values.size());
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    Rng user = genuine_stream.child(i);
    out.genuine.push_back(ldp::perturb(params, data.values[i], user));
  }
  Rng attack_stream = rng.child(0x6d616c6963696f75ull);
  out.malicious = craft(data.domain, params, spec, attack_stream);
  out.eta_true = static_cast<double>(out.malicious.size()) /
                 static_cast<double>(out.genuine.size());
  return out;
}

}  // namespace ldpr::attack

#endif  // LDPR_ATTACK_HPP_
