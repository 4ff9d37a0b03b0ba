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

#ifndef LDPR_RECOVER_HPP_
#define LDPR_RECOVER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "ldpr/attack.hpp"
#include "ldpr/core.hpp"
#include "ldpr/ldp.hpp"

namespace ldpr::recover {

// How much the server knows about the attack: nothing, or the set of
// attacker-selected target items.
struct Knowledge {
  std::optional<std::vector<std::uint32_t>> targets;

  static Knowledge none() { return {}; }
  static Knowledge with_targets(std::vector<std::uint32_t> t) {
    if (t.empty()) throw std::invalid_argument("target set is empty");
    return Knowledge{std::move(t)};
  }
};

struct RecoveryConfig {
  // Assumed malicious-to-genuine ratio. A free input: the server never
  // infers it and typically overshoots the real value.
  double eta = 0.2;
  Knowledge knowledge;
  // The non-target malicious sum in partial knowledge uses -q*d as written;
  // set false to use -q*|D'| instead.
  bool paper_faithful_partial = true;
  // Negative-entry tolerance of the refinement loop; < 0 selects the
  // default 1e-12 * d.
  double tolerance = -1.0;

  void validate() const {
    if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  }
};

struct RecoveryResult {
  FrequencyVector estimated_genuine;   // before refinement
  FrequencyVector recovered;           // after refinement
  FrequencyVector malicious_estimate;  // assumed malicious frequencies
  std::vector<std::uint32_t> zeroed_set;
  std::size_t iterations = 0;
};

// Inverts the mixing of genuine and malicious frequencies:
// estimate(v) = (1 + eta) * f_z(v) - eta * f_y(v).
inline FrequencyVector genuine_estimator(const FrequencyVector& f_z,
                                         const FrequencyVector& f_y,
                                         double eta) {
  check_same_domain(f_z, f_y);
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  FrequencyVector out(f_z.size());
  for (std::size_t v = 0; v < f_z.size(); ++v) {
    out[v] = (1.0 + eta) * f_z[v] - eta * f_y[v];
  }
  return out;
}

// Expected summation of malicious frequencies over the whole domain,
// (1 - q d) / (p - q), learned from the protocol alone. For GRR this
// reduces algebraically to exactly 1 for every (epsilon, d).
inline double learned_malicious_sum(const ldp::PerturbParams& params) {
  if (params.protocol == ldp::Protocol::kGrr) return 1.0;
  const double d = static_cast<double>(params.domain_size);
  return (1.0 - params.q * d) / (params.p - params.q);
}

// Non-knowledge malicious estimate: zero on D0 = {v : f_z(v) <= 0}, the
// learned sum spread uniformly over D1 = D \ D0.
inline FrequencyVector estimate_malicious_none(const FrequencyVector& f_z,
                                               double sum_fy) {
  std::size_t d1_size = 0;
  for (double v : f_z.values) {
    if (v > 0.0) ++d1_size;
  }
  if (d1_size == 0) {
    throw std::runtime_error("all poisoned frequencies nonpositive");
  }
  const double share = sum_fy / static_cast<double>(d1_size);
  FrequencyVector out(f_z.size());
  for (std::size_t v = 0; v < f_z.size(); ++v) {
    out[v] = f_z[v] > 0.0 ? share : 0.0;
  }
  return out;
}

// Partial-knowledge malicious estimate. Non-targets D' share
// -q*d / (p - q) uniformly (or -q*|D'| / (p - q) in corrected mode);
// targets D'' share the remainder of the learned sum.
inline FrequencyVector estimate_malicious_partial(
    const FrequencyVector& f_z, double sum_fy,
    const std::vector<std::uint32_t>& targets,
    const ldp::PerturbParams& params, bool paper_faithful = true) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  const std::size_t d = f_z.size();
  std::vector<bool> is_target(d, false);
  for (auto t : targets) {
    if (t >= d) throw std::invalid_argument("target out of domain");
    is_target[t] = true;
  }
  std::size_t num_targets = 0;
  for (bool b : is_target) num_targets += b ? 1 : 0;
  const std::size_t num_others = d - num_targets;

  double sum_others = 0.0;
  if (num_others > 0) {
    const double numer =
        paper_faithful ? params.q * static_cast<double>(d)
                       : params.q * static_cast<double>(num_others);
    sum_others = -numer / (params.p - params.q);
  }
  const double sum_targets = sum_fy - sum_others;

  FrequencyVector out(d);
  const double other_share =
      num_others > 0 ? sum_others / static_cast<double>(num_others) : 0.0;
  const double target_share = sum_targets / static_cast<double>(num_targets);
  for (std::size_t v = 0; v < d; ++v) {
    out[v] = is_target[v] ? target_share : other_share;
  }
  return out;
}

// Refines an estimated frequency vector onto the probability simplex with
// the KKT active-set iteration: repeatedly subtract the uniform surplus
// (sum over the active set minus 1) and zero out entries that go negative,
// until every active entry is nonnegative. The fixed point is the closest
// (L2) nonnegative sum-to-one vector.
inline void refine(const FrequencyVector& estimate, double tolerance,
                   RecoveryResult& result) {
  const std::size_t d = estimate.size();
  if (d == 0) throw std::invalid_argument("empty frequency vector");
  for (double v : estimate.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite frequency");
  }
  if (tolerance < 0.0) tolerance = 1e-12 * static_cast<double>(d);

  std::vector<bool> zeroed(d, false);
  std::size_t active = d;
  FrequencyVector refined(d);
  std::size_t iterations = 0;
  for (;;) {
    if (active == 0) throw std::runtime_error("refinement degenerate");
    double active_sum = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      if (!zeroed[v]) active_sum += estimate[v];
    }
    const double shift = (active_sum - 1.0) / static_cast<double>(active);
    bool any_negative = false;
    for (std::size_t v = 0; v < d; ++v) {
      if (zeroed[v]) {
        refined[v] = 0.0;
        continue;
      }
      refined[v] = estimate[v] - shift;
      if (refined[v] < -tolerance) {
        zeroed[v] = true;
        refined[v] = 0.0;
        --active;
        any_negative = true;
      }
    }
    if (!any_negative) break;
    ++iterations;  // counts passes that moved items into the zeroed set
  }
  // Entries within tolerance of zero are clamped.
  for (auto& v : refined.values) {
    if (v < 0.0) v = 0.0;
  }

  result.recovered = std::move(refined);
  result.iterations = iterations;
  result.zeroed_set.clear();
  for (std::uint32_t v = 0; v < d; ++v) {
    if (zeroed[v]) result.zeroed_set.push_back(v);
  }
}

// Full recovery pipeline on the poisoned frequency vector: learn the
// malicious sum from the protocol, estimate the malicious frequencies
// (uniform, or split around the known targets), invert the mixture with the
// genuine frequency estimator, then refine onto the simplex.
inline RecoveryResult ldprecover(const FrequencyVector& f_z,
                                 const ldp::PerturbParams& params,
                                 const RecoveryConfig& config) {
  config.validate();
  if (f_z.size() != params.domain_size) {
    throw std::invalid_argument("domain mismatch");
  }
  const double sum_fy = learned_malicious_sum(params);
  RecoveryResult result;
  result.malicious_estimate =
      config.knowledge.targets
          ? estimate_malicious_partial(f_z, sum_fy, *config.knowledge.targets,
                                       params, config.paper_faithful_partial)
          : estimate_malicious_none(f_z, sum_fy);
  result.estimated_genuine =
      genuine_estimator(f_z, result.malicious_estimate, config.eta);
  refine(result.estimated_genuine, config.tolerance, result);
  return result;
}

// Comparison baseline: drop every report whose support set contains any
// target item, then aggregate the remainder. Genuine users that happen to
// support a target are dropped too; that is the documented failure mode.
inline FrequencyVector detection_baseline(
    const attack::PoisonedReportSet& reports,
    const std::vector<std::uint32_t>& targets,
    const ldp::PerturbParams& params) {
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  for (auto t : targets) {
    if (t >= params.domain_size) {
      throw std::invalid_argument("target out of domain");
    }
  }
  ldp::ReportList kept;
  auto matches_target = [&](const ldp::Report& r) {
    for (auto t : targets) {
      if (ldp::supports(params, r, t)) return true;
    }
    return false;
  };
  for (const auto* list : {&reports.genuine, &reports.malicious}) {
    for (const auto& r : *list) {
      if (!matches_target(r)) kept.push_back(r);
    }
  }
  if (kept.empty()) throw std::runtime_error("all reports dropped");
  return ldp::aggregate(params, kept).frequencies();
}

inline nlohmann::json recovery_result_to_json(const RecoveryResult& result) {
  return {{"recovered", result.recovered.values},
          {"estimated_genuine", result.estimated_genuine.values},
          {"malicious_estimate", result.malicious_estimate.values},
          {"zeroed", result.zeroed_set},
          {"iterations", result.iterations}};
}

}  // namespace ldpr::recover

#endif  // LDPR_RECOVER_HPP_
