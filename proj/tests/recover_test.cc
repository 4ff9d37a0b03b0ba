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

#include "ldpr/recover.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "ldpr/attack.hpp"
#include "ldpr/core.hpp"
#include "ldpr/ldp.hpp"
#include "test_util.hpp"

namespace ldpr::recover {
namespace {

using ldp::PerturbParams;
using ldp::Protocol;

TEST(GenuineEstimator, EtaZeroIsIdentity) {
  const FrequencyVector f_z({0.2, 0.5, 0.3});
  const FrequencyVector f_y({0.9, 0.05, 0.05});
  const auto out = genuine_estimator(f_z, f_y, 0.0);
  for (std::size_t v = 0; v < 3; ++v) EXPECT_DOUBLE_EQ(out[v], f_z[v]);
}

TEST(GenuineEstimator, WorkedExample) {
  // eta = 0.25, f_z = 0.2, f_y = 0.4 -> 1.25 * 0.2 - 0.25 * 0.4 = 0.15.
  const FrequencyVector f_z(std::vector<double>{0.2});
  const FrequencyVector f_y(std::vector<double>{0.4});
  EXPECT_THROW(genuine_estimator(f_z, FrequencyVector({0.1, 0.2}), 0.25),
               std::invalid_argument);
  const auto out = genuine_estimator(f_z, f_y, 0.25);
  EXPECT_NEAR(out[0], 0.15, 1e-15);
}

TEST(GenuineEstimator, InvertsTheMixtureExactly) {
  // f_z = (f_x + eta f_y) / (1 + eta)  =>  estimator returns f_x.
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(30);
    FrequencyVector f_x(d), f_y(d), f_z(d);
    const double eta = rng.uniform01() * 0.5;
    for (std::size_t v = 0; v < d; ++v) {
      f_x[v] = 2.0 * rng.uniform01() - 0.5;
      f_y[v] = 2.0 * rng.uniform01() - 0.5;
      f_z[v] = (f_x[v] + eta * f_y[v]) / (1.0 + eta);
    }
    const auto recovered = genuine_estimator(f_z, f_y, eta);
    for (std::size_t v = 0; v < d; ++v) {
      EXPECT_NEAR(recovered[v], f_x[v], 1e-12);
    }
  }
}

TEST(LearnedMaliciousSum, GrrIsExactlyOne) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const double eps = 0.1 + 3.0 * rng.uniform01();
    const auto d = static_cast<std::uint32_t>(2 + rng.below(1000));
    const auto params = PerturbParams::grr(ItemDomain(d), eps);
    EXPECT_EQ(learned_malicious_sum(params), 1.0);
  }
}

TEST(LearnedMaliciousSum, OueWorkedExamples) {
  // eps = ln 3, d = 4: (1 - 4q) / (p - q) with q = 1/4 -> 0.
  const auto small = PerturbParams::oue(ItemDomain(4), std::log(3.0));
  EXPECT_NEAR(learned_malicious_sum(small), 0.0, 1e-12);

  // eps = 0.5, d = 102: equals 2 (e^0.5 + 1 - 102) / (e^0.5 - 1), about
  // -306.3 (independent closed-form evaluation).
  const auto big = PerturbParams::oue(ItemDomain(102), 0.5);
  const double e = std::exp(0.5);
  const double expected = 2.0 * (e + 1.0 - 102.0) / (e - 1.0);
  EXPECT_NEAR(learned_malicious_sum(big), expected, 1e-9);
  EXPECT_NEAR(expected, -306.3, 0.05);
}

TEST(EstimateMaliciousNone, UniformWhenAllPositive) {
  const FrequencyVector f_z({0.2, 0.3, 0.5});
  const auto out = estimate_malicious_none(f_z, 0.9);
  for (std::size_t v = 0; v < 3; ++v) EXPECT_NEAR(out[v], 0.3, 1e-15);
}

TEST(EstimateMaliciousNone, ZeroesNonpositiveEntries) {
  const FrequencyVector f_z({0.5, -0.1, 0.6});
  const auto out = estimate_malicious_none(f_z, 1.0);
  EXPECT_NEAR(out[0], 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
  EXPECT_NEAR(out[2], 0.5, 1e-15);
}

TEST(EstimateMaliciousNone, BoundaryUsesNonStrictRule) {
  // f_z exactly zero belongs to D0.
  const FrequencyVector f_z({1.0, 0.0});
  const auto out = estimate_malicious_none(f_z, 0.7);
  EXPECT_NEAR(out[0], 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
}

TEST(EstimateMaliciousNone, AllNonpositiveRejected) {
  const FrequencyVector f_z({-0.5, 0.0});
  EXPECT_THROW(estimate_malicious_none(f_z, 1.0), std::runtime_error);
}

TEST(EstimateMaliciousPartial, GrrWorkedExample) {
  // GRR eps = ln 3, d = 4, targets = {0}: non-target sum = -(q d)/(p - q) =
  // -2, spread as -2/3 each; target gets 1 - (-2) = 3.
  const auto params = PerturbParams::grr(ItemDomain(4), std::log(3.0));
  const FrequencyVector f_z({0.9, 0.05, 0.03, 0.02});
  const double sum_fy = learned_malicious_sum(params);
  const auto out = estimate_malicious_partial(f_z, sum_fy, {0}, params, true);
  EXPECT_NEAR(out[0], 3.0, 1e-12);
  for (std::size_t v = 1; v < 4; ++v) EXPECT_NEAR(out[v], -2.0 / 3.0, 1e-12);
}

TEST(EstimateMaliciousPartial, AllTargetsDegenerate) {
  const auto params = PerturbParams::grr(ItemDomain(3), 1.0);
  const FrequencyVector f_z({0.4, 0.3, 0.3});
  const auto out =
      estimate_malicious_partial(f_z, 1.0, {0, 1, 2}, params, true);
  for (std::size_t v = 0; v < 3; ++v) EXPECT_NEAR(out[v], 1.0 / 3.0, 1e-12);
}

TEST(EstimateMaliciousPartial, CorrectedModeUsesActiveCount) {
  const auto params = PerturbParams::grr(ItemDomain(4), std::log(3.0));
  const FrequencyVector f_z({0.9, 0.05, 0.03, 0.02});
  const auto out = estimate_malicious_partial(f_z, 1.0, {0}, params, false);
  // Corrected: non-target sum = -(q |D'|)/(p - q) = -(1/6*3)/(1/3) = -1.5.
  for (std::size_t v = 1; v < 4; ++v) EXPECT_NEAR(out[v], -0.5, 1e-12);
  EXPECT_NEAR(out[0], 2.5, 1e-12);
}

TEST(EstimateMaliciousPartial, TracksRealizedMgaFrequencies) {
  // Under MGA on GRR, the corrected-mode per-target estimate matches the
  // realized malicious aggregate up to sampling noise. The paper-faithful
  // mode carries a known systematic offset of q / (p - q) per target (it
  // books q*d instead of q*|D'| on the non-target side).
  const ItemDomain domain(102);
  const auto params = PerturbParams::grr(domain, 0.5);
  std::vector<std::uint32_t> targets;
  for (std::uint32_t t = 0; t < 10; ++t) targets.push_back(t * 7);
  Rng rng(17);
  const std::size_t m = 10000;
  const auto crafted = attack::craft_mga(domain, params, m, targets, rng);
  const auto f_y = ldp::aggregate(params, crafted).frequencies();

  const double sum_fy = learned_malicious_sum(params);
  const FrequencyVector f_z(std::vector<double>(102, 0.01));
  const auto corrected =
      estimate_malicious_partial(f_z, sum_fy, targets, params, false);
  const auto faithful =
      estimate_malicious_partial(f_z, sum_fy, targets, params, true);

  // Mean realized target frequency is estimated ~exactly by corrected mode:
  // the per-target Monte-Carlo sd is sqrt(0.1*0.9/m) / (p - q).
  const double sigma =
      std::sqrt(0.1 * 0.9 / static_cast<double>(m)) / (params.p - params.q);
  double mean_real = 0.0;
  for (auto t : targets) mean_real += f_y[t] / 10.0;
  EXPECT_NEAR(corrected[targets[0]], mean_real, 3.0 * sigma / std::sqrt(10.0));

  const double offset = params.q / (params.p - params.q);
  EXPECT_NEAR(faithful[targets[0]], corrected[targets[0]] + offset, 1e-9);
  EXPECT_NEAR(faithful[targets[0]], mean_real + offset,
              3.0 * sigma / std::sqrt(10.0));
}

TEST(Refine, HandExecutedExample) {
  // (0.6, 0.6, -0.2): first pass zeroes item 2, second pass shifts by 0.1.
  RecoveryResult result;
  refine(FrequencyVector({0.6, 0.6, -0.2}), -1.0, result);
  EXPECT_NEAR(result.recovered[0], 0.5, 1e-12);
  EXPECT_NEAR(result.recovered[1], 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(result.recovered[2], 0.0);
  EXPECT_EQ(result.zeroed_set, (std::vector<std::uint32_t>{2}));
  EXPECT_EQ(result.iterations, 1u);
}

TEST(Refine, ValidDistributionIsFixedPoint) {
  RecoveryResult result;
  refine(FrequencyVector({0.25, 0.5, 0.25}), -1.0, result);
  EXPECT_NEAR(result.recovered[0], 0.25, 1e-12);
  EXPECT_NEAR(result.recovered[1], 0.5, 1e-12);
  EXPECT_NEAR(result.recovered[2], 0.25, 1e-12);
  EXPECT_TRUE(result.zeroed_set.empty());
  EXPECT_EQ(result.iterations, 0u);
}

TEST(Refine, OutputIsNonnegativeNormalizedAndIdempotent) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.below(40);
    FrequencyVector f(d);
    for (auto& v : f.values) v = -1.0 + 3.0 * rng.uniform01();
    RecoveryResult result;
    refine(f, -1.0, result);
    double sum = 0.0;
    for (double v : result.recovered.values) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    RecoveryResult again;
    refine(result.recovered, -1.0, again);
    for (std::size_t v = 0; v < d; ++v) {
      EXPECT_NEAR(again.recovered[v], result.recovered[v], 1e-12);
    }
  }
}

TEST(Refine, MatchesExhaustiveActiveSetOracle) {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(11);  // d <= 12
    std::vector<double> f(d);
    for (auto& v : f) v = -1.0 + 3.0 * rng.uniform01();
    const auto oracle = testing::simplex_cls_oracle(f);
    RecoveryResult result;
    refine(FrequencyVector(f), -1.0, result);
    for (std::size_t v = 0; v < d; ++v) {
      EXPECT_NEAR(result.recovered[v], oracle[v], 1e-8);
    }
  }
}

TEST(Refine, MatchesOracleOnWideMagnitudeInputs) {
  // Estimates produced under strong attacks carry entries far outside
  // [0, 1] (for OUE the uniform correction can add +-5 per item).
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.below(11);
    std::vector<double> f(d);
    for (auto& v : f) v = -5.0 + 11.0 * rng.uniform01();
    const auto oracle = testing::simplex_cls_oracle(f);
    RecoveryResult result;
    refine(FrequencyVector(f), -1.0, result);
    for (std::size_t v = 0; v < d; ++v) {
      EXPECT_NEAR(result.recovered[v], oracle[v], 1e-8);
    }
  }
}

TEST(Refine, RejectsNonFiniteInput) {
  RecoveryResult result;
  EXPECT_THROW(
      refine(FrequencyVector({0.1, std::nan(""), 0.2}), -1.0, result),
      std::invalid_argument);
}

TEST(Ldprecover, EtaZeroOnValidDistributionIsIdentity) {
  const auto params = PerturbParams::grr(ItemDomain(4), 1.0);
  const FrequencyVector f_z({0.4, 0.3, 0.2, 0.1});
  RecoveryConfig config;
  config.eta = 0.0;
  const auto result = ldprecover(f_z, params, config);
  for (std::size_t v = 0; v < 4; ++v) {
    EXPECT_NEAR(result.recovered[v], f_z[v], 1e-12);
  }
  EXPECT_TRUE(result.zeroed_set.empty());
}

TEST(Ldprecover, RecoversFromAdaptiveAttackOnGrr) {
  // End-to-end: AA on GRR at IPUMS-like scale (shrunk for unit-test speed);
  // recovered beats poisoned in at least 9 of 10 seeded trials.
  const auto data = synthesize_zipf(ItemDomain(102), 40000, 1.1, 12);
  const auto params = PerturbParams::grr(data.domain, 0.5);
  const auto f_true = true_frequencies(data);
  const std::size_t m = attack::malicious_count_for_beta(0.05, 40000);
  int improved = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng trial_rng(100 + trial);
    Rng setup = trial_rng.child(1);
    const auto spec =
        attack::AttackSpec::adaptive(m, setup.dirichlet(0.1, 102));
    Rng poison_rng = trial_rng.child(2);
    const auto reports = attack::poison(data, params, spec, poison_rng);
    const auto combined = reports.combined();
    const auto f_z = ldp::aggregate(params, combined).frequencies();

    RecoveryConfig config;
    config.eta = 0.2;
    const auto result = ldprecover(f_z, params, config);

    double mse_poisoned = 0.0, mse_recovered = 0.0;
    for (std::size_t v = 0; v < 102; ++v) {
      mse_poisoned += (f_z[v] - f_true[v]) * (f_z[v] - f_true[v]);
      mse_recovered += (result.recovered[v] - f_true[v]) *
                       (result.recovered[v] - f_true[v]);
    }
    improved += mse_recovered < mse_poisoned ? 1 : 0;
  }
  EXPECT_GE(improved, 9);
}

TEST(Ldprecover, EstimatorUnbiasedWithTrueMaliciousKnowledge) {
  // With the realized malicious aggregate and the true eta, the estimator
  // recovers the genuine aggregate; its mean over trials tracks the true
  // frequencies within the Lemma-style variance bound.
  const ItemDomain domain(16);
  const std::size_t n = 100000;
  const auto data = synthesize_zipf(domain, n, 1.0, 8);
  const auto f_true = true_frequencies(data);
  const auto params = PerturbParams::grr(domain, 0.5);

  const int trials = 100;
  std::vector<std::vector<double>> estimates(domain.size);
  for (int t = 0; t < trials; ++t) {
    Rng trial_rng(500 + t);
    Rng setup = trial_rng.child(1);
    const std::size_t m = attack::malicious_count_for_beta(0.05, n);
    const auto spec =
        attack::AttackSpec::adaptive(m, setup.dirichlet(0.1, domain.size));
    Rng poison_rng = trial_rng.child(2);
    const auto reports = attack::poison(data, params, spec, poison_rng);
    const auto combined = reports.combined();
    const auto f_z = ldp::aggregate(params, combined).frequencies();
    const auto f_y = ldp::aggregate(params, reports.malicious).frequencies();
    const auto estimate = genuine_estimator(f_z, f_y, reports.eta_true);
    for (std::uint32_t v = 0; v < domain.size; ++v) {
      estimates[v].push_back(estimate[v]);
    }
  }
  double ratio_sum = 0.0;
  for (std::uint32_t v = 0; v < domain.size; ++v) {
    // sigma_x^2 = q(1-q)/(n (p-q)^2) + f (1-p-q)/(n (p-q)).
    const double nd = static_cast<double>(n);
    const double var =
        params.q * (1 - params.q) /
            (nd * (params.p - params.q) * (params.p - params.q)) +
        f_true[v] * (1 - params.p - params.q) / (nd * (params.p - params.q));
    const double sigma = std::sqrt(var);
    EXPECT_NEAR(testing::mean_of(estimates[v]), f_true[v],
                4.0 * sigma / std::sqrt(trials));
    ratio_sum += testing::sample_variance(estimates[v]) / var;
  }
  const double mean_ratio = ratio_sum / domain.size;
  EXPECT_GT(mean_ratio, 0.7);
  EXPECT_LT(mean_ratio, 1.3);
}

TEST(Ldprecover, MaliciousFrequencyDistributionApproachesNormal) {
  // Kolmogorov distance between the empirical f_y(v) distribution and its
  // fitted normal shrinks as the number of malicious users grows.
  const ItemDomain domain(12);
  const auto params = PerturbParams::grr(domain, 0.5);
  Rng setup(314);
  const auto dist = setup.dirichlet(1.0, domain.size);
  std::vector<double> distances;
  for (const std::size_t m : {100u, 1000u, 10000u}) {
    std::vector<double> sample;
    for (int t = 0; t < 300; ++t) {
      Rng rng(9000 + t);
      const auto crafted =
          attack::craft_adaptive(domain, params, m, dist, rng);
      sample.push_back(ldp::aggregate(params, crafted).frequencies()[3]);
    }
    distances.push_back(testing::ks_distance_to_fitted_normal(sample));
  }
  int inversions = 0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    inversions += distances[i] > distances[i - 1] ? 1 : 0;
  }
  EXPECT_LE(inversions, 1);
}

TEST(DetectionBaseline, DropsAllMgaOueReports) {
  const auto data = synthesize_zipf(ItemDomain(12), 4000, 1.0, 3);
  const auto params = PerturbParams::oue(data.domain, 0.5);
  const std::vector<std::uint32_t> targets = {2, 5};
  const auto spec = attack::AttackSpec::mga(300, targets);
  Rng rng(4);
  const auto reports = attack::poison(data, params, spec, rng);
  // Every crafted OUE report sets every target bit, so detection removes
  // the entire malicious set (and the genuine reports supporting targets).
  const auto frequencies = detection_baseline(reports, targets, params);
  std::size_t surviving_malicious = 0;
  for (const auto& r : reports.malicious) {
    bool hit = false;
    for (auto t : targets) hit = hit || ldp::supports(params, r, t);
    surviving_malicious += hit ? 0 : 1;
  }
  EXPECT_EQ(surviving_malicious, 0u);
  EXPECT_EQ(frequencies.size(), 12u);
}

TEST(DetectionBaseline, NoTargetSupportersEqualsPlainAggregation) {
  // If no report supports any target, nothing is dropped.
  const auto params = PerturbParams::grr(ItemDomain(6), 0.5);
  attack::PoisonedReportSet reports;
  for (int i = 0; i < 50; ++i) {
    reports.genuine.push_back(ldp::GrrReport{static_cast<std::uint32_t>(i % 3)});
  }
  const auto baseline = detection_baseline(reports, {5}, params);
  const auto plain = ldp::aggregate(params, reports.genuine).frequencies();
  for (std::size_t v = 0; v < 6; ++v) {
    EXPECT_DOUBLE_EQ(baseline[v], plain[v]);
  }
}

TEST(DetectionBaseline, AllReportsDroppedIsAnError) {
  const auto params = PerturbParams::grr(ItemDomain(4), 0.5);
  attack::PoisonedReportSet reports;
  for (int i = 0; i < 10; ++i) reports.malicious.push_back(ldp::GrrReport{1});
  EXPECT_THROW(detection_baseline(reports, {1}, params), std::runtime_error);
}

TEST(RecoveryResultJson, SerializesAllFields) {
  const auto params = PerturbParams::grr(ItemDomain(4), 1.0);
  RecoveryConfig config;
  config.eta = 0.1;
  const auto result =
      ldprecover(FrequencyVector({0.6, 0.5, -0.1, 0.0}), params, config);
  const auto j = recovery_result_to_json(result);
  EXPECT_EQ(j.at("recovered").size(), 4u);
  EXPECT_EQ(j.at("estimated_genuine").size(), 4u);
  EXPECT_EQ(j.at("malicious_estimate").size(), 4u);
  EXPECT_TRUE(j.contains("zeroed"));
  EXPECT_TRUE(j.contains("iterations"));
}

}  // namespace
}  // namespace ldpr::recover
