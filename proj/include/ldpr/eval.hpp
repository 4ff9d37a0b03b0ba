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

#ifndef LDPR_EVAL_HPP_
#define LDPR_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ldpr/attack.hpp"
#include "ldpr/core.hpp"
#include "ldpr/ldp.hpp"
#include "ldpr/recover.hpp"

namespace ldpr::eval {

// Mean squared error over all items.
inline double mse(const FrequencyVector& f_true, const FrequencyVector& f_est) {
  check_same_domain(f_true, f_est);
  double total = 0.0;
  for (std::size_t v = 0; v < f_true.size(); ++v) {
    const double diff = f_true[v] - f_est[v];
    total += diff * diff;
  }
  return total / static_cast<double>(f_true.size());
}

// Total frequency gain over the target items, measured after-minus-before:
// a successful attack has FG > 0, and a recovery that pushes targets below
// their genuine aggregate goes negative.
inline double frequency_gain(const FrequencyVector& f_genuine_agg,
                             const FrequencyVector& f_est,
                             const std::vector<std::uint32_t>& targets) {
  check_same_domain(f_genuine_agg, f_est);
  if (targets.empty()) throw std::invalid_argument("target set is empty");
  double total = 0.0;
  for (auto t : targets) {
    if (t >= f_est.size()) throw std::invalid_argument("target out of domain");
    total += f_est[t] - f_genuine_agg[t];
  }
  return total;
}

enum class AttackChoice { kNone, kManip, kMga, kAdaptive, kMgaIpa };

inline std::string attack_name(AttackChoice kind) {
  switch (kind) {
    case AttackChoice::kNone: return "none";
    case AttackChoice::kManip: return "manip";
    case AttackChoice::kMga: return "mga";
    case AttackChoice::kAdaptive: return "adaptive";
    case AttackChoice::kMgaIpa: return "mga-ipa";
  }
  throw std::logic_error("unknown attack");
}

inline AttackChoice attack_from_name(const std::string& name) {
  if (name == "none") return AttackChoice::kNone;
  if (name == "manip") return AttackChoice::kManip;
  if (name == "mga") return AttackChoice::kMga;
  if (name == "adaptive" || name == "aa") return AttackChoice::kAdaptive;
  if (name == "mga-ipa") return AttackChoice::kMgaIpa;
  throw std::invalid_argument("unknown attack kind '" + name + "'");
}

struct DatasetSpec {
  enum class Source { kZipf, kFile };
  Source source = Source::kZipf;
  std::string path;          // file source
  std::uint32_t d = 102;     // zipf source
  std::size_t n = 389894;
  double s = 1.1;
};

enum class SweepParameter { kBeta, kEpsilon, kEta };

inline std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::kBeta: return "beta";
    case SweepParameter::kEpsilon: return "epsilon";
    case SweepParameter::kEta: return "eta";
  }
  throw std::logic_error("unknown sweep parameter");
}

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kBeta;
  std::vector<double> values;
};

struct ExperimentConfig {
  DatasetSpec dataset;

  ldp::Protocol protocol = ldp::Protocol::kGrr;
  double epsilon = 0.5;
  std::uint32_t g = 0;  // 0: OLH default ceil(e^eps + 1)

  AttackChoice attack = AttackChoice::kAdaptive;
  double beta = 0.05;
  std::optional<std::size_t> m;  // overrides beta when set
  std::uint32_t r = 10;
  double h_fraction = 0.5;   // Manip sub-domain fraction
  double aa_alpha = 0.03;    // Dirichlet concentration of the AA distribution
  std::size_t attackers = 1;

  double eta = 0.2;
  bool paper_faithful_partial = true;
  double tolerance = -1.0;

  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;

  std::optional<SweepSpec> sweep;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("run.trials must be >= 1");
    if (beta < 0.0 || beta >= 1.0) {
      throw std::invalid_argument("attack.beta must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("protocol.epsilon must be positive");
    }
    if (eta < 0.0) throw std::invalid_argument("recovery.eta must be >= 0");
    if (r < 1) throw std::invalid_argument("attack.r must be >= 1");
    if (attackers < 1) {
      throw std::invalid_argument("attack.attackers must be >= 1");
    }
    if (!(h_fraction > 0.0) || h_fraction > 1.0) {
      throw std::invalid_argument("attack.h_fraction must lie in (0, 1]");
    }
    if (!(aa_alpha > 0.0)) {
      throw std::invalid_argument("attack.aa_alpha must be positive");
    }
    if (sweep) {
      // Sweep grids stay inside the documented parameter ranges.
      if (sweep->values.empty()) {
        throw std::invalid_argument("sweep.values must be nonempty");
      }
      for (double v : sweep->values) {
        switch (sweep->parameter) {
          case SweepParameter::kBeta:
            if (v < 0.0 || v > 0.1) {
              throw std::invalid_argument(
                  "sweep beta values must lie in [0, 0.1]");
            }
            break;
          case SweepParameter::kEpsilon:
            if (v < 0.1 || v > 1.6) {
              throw std::invalid_argument(
                  "sweep epsilon values must lie in [0.1, 1.6]");
            }
            break;
          case SweepParameter::kEta:
            if (v < 0.01 || v > 0.4) {
              throw std::invalid_argument(
                  "sweep eta values must lie in [0.01, 0.4]");
            }
            break;
        }
      }
    }
  }
};

inline constexpr const char* kMethodPoisoned = "Poisoned";
inline constexpr const char* kMethodRecover = "LDPRecover";
inline constexpr const char* kMethodRecoverStar = "LDPRecover*";
inline constexpr const char* kMethodDetection = "Detection";

// One (method, metric) row: per-trial values plus their arithmetic mean.
// Failed cells are NaN and excluded from the mean.
struct MetricRow {
  std::string method;
  std::string metric;  // "mse" or "fg"
  std::vector<double> per_trial;
  double mean = std::numeric_limits<double>::quiet_NaN();

  void finalize_mean() {
    double total = 0.0;
    std::size_t count = 0;
    for (double v : per_trial) {
      if (std::isfinite(v)) {
        total += v;
        ++count;
      }
    }
    mean = count > 0 ? total / static_cast<double>(count)
                     : std::numeric_limits<double>::quiet_NaN();
  }
};

// Snapshot of trial 0, kept for the inspect subcommand.
struct TrialDiagnostics {
  FrequencyVector f_true;
  FrequencyVector genuine_agg;
  FrequencyVector poisoned;
  FrequencyVector recovered;
  recover::RecoveryResult recovery;
  std::vector<std::uint32_t> targets;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  TrialDiagnostics diagnostics;

  const MetricRow* find(const std::string& method,
                        const std::string& metric) const {
    for (const auto& row : rows) {
      if (row.method == method && row.metric == metric) return &row;
    }
    return nullptr;
  }
};

namespace detail {

inline Dataset materialize_dataset(const DatasetSpec& spec,
                                   std::uint64_t seed) {
  if (spec.source == DatasetSpec::Source::kFile) {
    return load_dataset(spec.path);
  }
  return synthesize_zipf(ItemDomain(spec.d), spec.n, spec.s,
                         mix64(seed ^ 0xda7a5e7ull));
}

// Builds the attack instances for one trial. Target sets, the Manip
// sub-domain, and the AA distribution are all drawn from the trial's own
// substream.
inline std::vector<attack::AttackSpec> trial_attack_specs(
    const ExperimentConfig& config, const ItemDomain& domain, std::size_t m,
    Rng& rng, std::vector<std::uint32_t>& declared_targets) {
  declared_targets.clear();
  std::vector<attack::AttackSpec> specs;
  if (config.attack == AttackChoice::kNone || m == 0) return specs;

  auto pick_targets = [&](Rng& r) {
    std::vector<std::uint32_t> pool(domain.size);
    for (std::uint32_t i = 0; i < domain.size; ++i) pool[i] = i;
    const auto count = std::min<std::size_t>(config.r, domain.size);
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + r.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
  };

  const std::size_t num_attackers =
      config.attack == AttackChoice::kAdaptive ? config.attackers : 1;
  const std::size_t share = m / num_attackers;
  const std::size_t remainder = m % num_attackers;
  for (std::size_t a = 0; a < num_attackers; ++a) {
    Rng setup = rng.child(0xa77ac4ull + a);
    const std::size_t m_a = share + (a < remainder ? 1 : 0);
    switch (config.attack) {
      case AttackChoice::kManip:
        specs.push_back(attack::AttackSpec::manip(m_a, config.h_fraction));
        break;
      case AttackChoice::kMga:
        declared_targets = pick_targets(setup);
        specs.push_back(attack::AttackSpec::mga(m_a, declared_targets));
        break;
      case AttackChoice::kMgaIpa:
        declared_targets = pick_targets(setup);
        specs.push_back(attack::AttackSpec::mga_ipa(m_a, declared_targets));
        break;
      case AttackChoice::kAdaptive:
        specs.push_back(attack::AttackSpec::adaptive(
            m_a, setup.dirichlet(config.aa_alpha, domain.size)));
        break;
      case AttackChoice::kNone:
        break;
    }
  }
  return specs;
}

// Items with the top-k frequency increase following the attack; the oracle
// target set handed to LDPRecover* and Detection under the adaptive attack.
inline std::vector<std::uint32_t> top_risers(const FrequencyVector& poisoned,
                                             const FrequencyVector& genuine,
                                             std::size_t k) {
  std::vector<std::uint32_t> order(poisoned.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return poisoned[a] - genuine[a] > poisoned[b] - genuine[b];
                   });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

// Everything one trial shares between the metric pass and the diagnostics
// pass: realized reports, aggregates, and the target set in play.
struct TrialState {
  attack::PoisonedReportSet reports;
  FrequencyVector genuine_agg;
  FrequencyVector poisoned;
  std::vector<std::uint32_t> targets;
};

inline TrialState build_trial(const ExperimentConfig& config,
                              const Dataset& data,
                              const ldp::PerturbParams& params,
                              std::size_t trial) {
  // Per-trial seeds are seed + trial_index.
  Rng trial_rng(config.seed + trial);

  const std::size_t n = data.user_count();
  const std::size_t m =
      config.attack == AttackChoice::kNone
          ? 0
          : (config.m ? *config.m
                      : attack::malicious_count_for_beta(config.beta, n));

  std::vector<std::uint32_t> declared_targets;
  Rng spec_rng = trial_rng.child(0x5e77ull);
  auto specs =
      trial_attack_specs(config, data.domain, m, spec_rng, declared_targets);

  TrialState state;
  Rng poison_rng = trial_rng.child(0x90150ull);
  if (specs.size() == 1) {
    state.reports = attack::poison(data, params, specs[0], poison_rng);
  } else {
    // No attack, or a multi-attacker composition.
    Rng genuine_stream = poison_rng.child(0x67656e75696e65ull);
    state.reports.genuine.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rng user = genuine_stream.child(i);
      state.reports.genuine.push_back(
          ldp::perturb(params, data.values[i], user));
    }
    if (!specs.empty()) {
      Rng attack_stream = poison_rng.child(0x6d616c6963696f75ull);
      state.reports.malicious =
          attack::compose_attacks(data.domain, params, specs, attack_stream);
    }
    state.reports.eta_true =
        static_cast<double>(state.reports.malicious.size()) /
        static_cast<double>(n);
  }

  state.genuine_agg = ldp::aggregate(params, state.reports.genuine).frequencies();
  const auto combined = state.reports.combined();
  state.poisoned = ldp::aggregate(params, combined).frequencies();

  state.targets = declared_targets;
  if (config.attack == AttackChoice::kAdaptive && m > 0) {
    state.targets = top_risers(state.poisoned, state.genuine_agg,
                               std::max<std::size_t>(1, config.r / 2));
  }
  return state;
}

struct TrialValues {
  std::map<std::string, double> mse;
  std::map<std::string, double> fg;
};

inline TrialValues run_trial(const ExperimentConfig& config,
                             const Dataset& data,
                             const ldp::PerturbParams& params,
                             const FrequencyVector& f_true,
                             std::size_t trial) {
  const TrialState state = build_trial(config, data, params, trial);

  TrialValues values;
  auto record = [&](const std::string& method, const FrequencyVector& est) {
    values.mse[method] = mse(f_true, est);
    if (!state.targets.empty()) {
      values.fg[method] = frequency_gain(state.genuine_agg, est, state.targets);
    }
  };
  auto record_failure = [&](const std::string& method) {
    values.mse[method] = std::numeric_limits<double>::quiet_NaN();
    if (!state.targets.empty()) {
      values.fg[method] = std::numeric_limits<double>::quiet_NaN();
    }
  };

  record(kMethodPoisoned, state.poisoned);

  recover::RecoveryConfig rec_config;
  rec_config.eta = config.eta;
  rec_config.paper_faithful_partial = config.paper_faithful_partial;
  rec_config.tolerance = config.tolerance;
  try {
    const auto result = recover::ldprecover(state.poisoned, params, rec_config);
    record(kMethodRecover, result.recovered);
  } catch (const std::exception&) {
    record_failure(kMethodRecover);
  }

  if (!state.targets.empty()) {
    recover::RecoveryConfig star_config = rec_config;
    star_config.knowledge = recover::Knowledge::with_targets(state.targets);
    try {
      const auto star = recover::ldprecover(state.poisoned, params, star_config);
      record(kMethodRecoverStar, star.recovered);
    } catch (const std::exception&) {
      record_failure(kMethodRecoverStar);
    }
    try {
      record(kMethodDetection,
             recover::detection_baseline(state.reports, state.targets, params));
    } catch (const std::exception&) {
      record_failure(kMethodDetection);
    }
  }
  return values;
}

}  // namespace detail

// Runs `trials` seeded repetitions of perturb -> attack -> aggregate ->
// recover and reports per-method MSE (against the true frequencies) and FG
// (against that trial's genuine aggregate). Deterministic under the seed;
// trials may execute concurrently, each owning its RNG substream.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset data = detail::materialize_dataset(config.dataset, config.seed);
  const auto params = ldp::PerturbParams::make(config.protocol, data.domain,
                                               config.epsilon, config.g);
  const FrequencyVector f_true = true_frequencies(data);

  std::vector<detail::TrialValues> all(config.trials);
  const std::size_t jobs = std::max<std::size_t>(1, config.jobs);
  if (jobs == 1 || config.trials == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) {
      all[t] = detail::run_trial(config, data, params, f_true, t);
    }
  } else {
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex mu;
    const auto worker = [&] {
      for (;;) {
        std::size_t t;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= config.trials) return;
          t = next++;
        }
        all[t] = detail::run_trial(config, data, params, f_true, t);
      }
    };
    const std::size_t spawn = std::min(jobs, config.trials);
    workers.reserve(spawn);
    for (std::size_t i = 0; i < spawn; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }

  // Deterministic row order: method-major, mse before fg.
  ExperimentResult result;
  const std::vector<std::string> method_order = {
      kMethodPoisoned, kMethodRecover, kMethodRecoverStar, kMethodDetection};
  for (const auto& method : method_order) {
    for (const std::string metric : {"mse", "fg"}) {
      bool present = false;
      for (const auto& trial : all) {
        const auto& table = metric == "mse" ? trial.mse : trial.fg;
        if (table.count(method) != 0) present = true;
      }
      if (!present) continue;
      MetricRow row;
      row.method = method;
      row.metric = metric;
      row.per_trial.reserve(config.trials);
      for (const auto& trial : all) {
        const auto& table = metric == "mse" ? trial.mse : trial.fg;
        const auto it = table.find(method);
        row.per_trial.push_back(it != table.end()
                                    ? it->second
                                    : std::numeric_limits<double>::quiet_NaN());
      }
      row.finalize_mean();
      result.rows.push_back(std::move(row));
    }
  }

  // Trial 0 intermediates, re-derived for inspection output.
  {
    detail::TrialState state = detail::build_trial(config, data, params, 0);
    result.diagnostics.f_true = f_true;
    result.diagnostics.genuine_agg = std::move(state.genuine_agg);
    result.diagnostics.poisoned = state.poisoned;
    result.diagnostics.targets = std::move(state.targets);
    recover::RecoveryConfig rec_config;
    rec_config.eta = config.eta;
    rec_config.paper_faithful_partial = config.paper_faithful_partial;
    rec_config.tolerance = config.tolerance;
    result.diagnostics.recovery =
        recover::ldprecover(state.poisoned, params, rec_config);
    result.diagnostics.recovered = result.diagnostics.recovery.recovered;
  }
  return result;
}

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kBeta;
  std::vector<SweepPoint> points;
};

// Runs one experiment per grid value, varying exactly one of beta, epsilon,
// or eta while the rest stay fixed.
inline SweepResult run_sweep(const ExperimentConfig& config) {
  if (!config.sweep) throw std::invalid_argument("config declares no sweep");
  config.validate();
  SweepResult out;
  out.parameter = config.sweep->parameter;
  for (double value : config.sweep->values) {
    ExperimentConfig point = config;
    point.sweep.reset();
    switch (config.sweep->parameter) {
      case SweepParameter::kBeta: point.beta = value; break;
      case SweepParameter::kEpsilon: point.epsilon = value; break;
      case SweepParameter::kEta: point.eta = value; break;
    }
    out.points.push_back({value, run_experiment(point)});
  }
  return out;
}

}  // namespace ldpr::eval

#endif  // LDPR_EVAL_HPP_
