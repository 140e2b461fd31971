// Copyright 2026 The vfmh Authors
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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "support/checks.hpp"
#include "vfmh/core/errors.hpp"
#include "vfmh/metrics/bound.hpp"
#include "vfmh/metrics/ledger.hpp"
#include "vfmh/metrics/records.hpp"

namespace vfmh::metrics {
namespace {

using transport::MsgType;

BoundParams params(double mu, double eta, double l, double g, double b0) {
  BoundParams p;
  p.strong_convexity = mu;
  p.learning_rate = eta;
  p.smoothness = l;
  p.grad_bound = g;
  p.initial_gap = b0;
  return p;
}

TEST(BoundRecursion, HandArithmetic) {
  const auto b = bound_trajectory(params(2, 0.1, 2, 1, 1), 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_NEAR(b[1], 0.8 * 1 + 0.5 * 0.01 * 2 * 1, 1e-15);
  EXPECT_NEAR(b[1], 0.81, 1e-15);
}

TEST(BoundRecursion, VanishingStepKeepsInitialGap) {
  const auto b = bound_trajectory(params(1, 1e-300, 2, 1, 3.5), 10);
  for (double v : b) EXPECT_EQ(v, 3.5);
}

TEST(BoundRecursion, UnitContractionWithoutNoiseReachesZero) {
  const auto b = bound_trajectory(params(2, 0.5, 2, 0, 4.0), 1);
  EXPECT_EQ(b[1], 0.0);
}

TEST(BoundRecursion, MonotoneTowardFixedPoint) {
  const auto p = params(0.5, 0.2, 2, 3, 10);
  ASSERT_TRUE(p.informative());
  EXPECT_NEAR(p.fixed_point(), 0.5 * 0.04 * 2 * 3 / (0.5 * 0.2), 1e-12);
  const auto b = bound_trajectory(p, 300);
  for (std::size_t t = 1; t < b.size(); ++t) {
    EXPECT_LE(b[t], b[t - 1]);
    EXPECT_GE(b[t], p.fixed_point() - 1e-12);
  }
  EXPECT_NEAR(b.back(), p.fixed_point(), 1e-9);
}

TEST(BoundParams, InformativeRangeAndValidation) {
  EXPECT_FALSE(params(2, 0.5, 2, 1, 1).informative());
  EXPECT_FALSE(params(0, 0.5, 2, 1, 1).informative());
  EXPECT_TRUE(params(1, 0.5, 2, 1, 1).informative());
  EXPECT_THROW(params(3, 0.1, 2, 1, 1).validate(), NumericError);
  EXPECT_THROW(params(1, 0.0, 2, 1, 1).validate(), NumericError);
  EXPECT_THROW(params(1, 0.1, 2, -1, 1).validate(), NumericError);
}

Tensor random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return testing::random_tensor({n, d}, rng);
}

std::vector<int> random_labels(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  return testing::random_labels(n, m, rng);
}

TEST(SoftmaxRegression, SmoothnessMatchesDenseEigensolver) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::size_t n = 50, d = 7;
    const Tensor x = random_features(n, d, seed);
    SoftmaxRegression problem(x, random_labels(n, 4, seed), 4, 0.3);
    Eigen::MatrixXd a(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) a(i, j) = x.at(i, j);
      a(i, d) = 1.0;
    }
    const Eigen::MatrixXd gram = a.transpose() * a / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double top = es.eigenvalues().maxCoeff();
    EXPECT_NEAR(problem.smoothness(), 0.5 * top + 0.3, 1e-9 * top);
    EXPECT_NEAR(top_eigenvalue(problem.gram()), top, 1e-9 * top);
  }
}

TEST(SoftmaxRegression, GradientMatchesFiniteDifferences) {
  const Tensor x = random_features(20, 5, 3);
  SoftmaxRegression problem(x, random_labels(20, 3, 3), 3, 0.1);
  Rng rng(9);
  std::vector<double> theta(problem.dim());
  for (double& v : theta) v = rng.normal(0, 0.5);
  std::vector<double> g(problem.dim());
  problem.gradient(theta, g);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + 1e-5;
    const double up = problem.value(theta);
    theta[i] = saved - 1e-5;
    const double down = problem.value(theta);
    theta[i] = saved;
    EXPECT_NEAR(g[i], (up - down) / 2e-5, 1e-8);
  }
}

TEST(SoftmaxRegression, ZeroParametersGiveLogClasses) {
  SoftmaxRegression problem(random_features(10, 3, 1), random_labels(10, 5, 1), 5, 1.0);
  EXPECT_NEAR(problem.value(std::vector<double>(problem.dim(), 0.0)), std::log(5.0), 1e-14);
}

TEST(QuadraticProblem, ConstantsAndOptimum) {
  QuadraticProblem q({0.5, 3.0});
  EXPECT_EQ(q.smoothness(), 3.0);
  EXPECT_EQ(q.strong_convexity(), 0.5);
  const auto opt = solve_optimum(q, {1.0, -2.0});
  EXPECT_LT(opt.grad_norm, 1e-10);
  EXPECT_NEAR(opt.value, 0.0, 1e-20);
}

TEST(CheckBound, QuadraticHasNoViolations) {
  QuadraticProblem q({0.5, 1.0, 2.0, 4.0});
  Rng rng(2);
  for (int s = 0; s < 10; ++s) {
    std::vector<double> theta0(4);
    for (double& v : theta0) v = rng.normal(0, 1);
    const auto check = check_bound(q, theta0, 0.25, 100);
    EXPECT_EQ(check.checked(), 101u);
    EXPECT_EQ(check.violations, 0u);
    EXPECT_TRUE(check.params.informative());
  }
}

TEST(CheckBound, LogisticCalibrationStaysBelowBound) {
  const Tensor x = random_features(200, 6, 4);
  SoftmaxRegression problem(x, random_labels(200, 3, 4), 3, 0.1);
  const std::vector<double> theta0(problem.dim(), 0.2);
  const auto check = check_bound(problem, theta0, 1.0 / problem.smoothness(), 150);
  EXPECT_LE(check.violation_rate(), 0.05);
  EXPECT_EQ(check.bounds.front(), check.params.initial_gap);
  EXPECT_NEAR(check.gaps.front(), check.params.initial_gap, 1e-12);
}

TEST(EstimateConstants, GradientBoundCoversTrajectory) {
  QuadraticProblem q({1.0, 2.0});
  const std::vector<double> theta0{2.0, 1.0};
  const auto p = estimate_constants(q, theta0, 0.1, 50, 0.0);
  // Largest ||grad||^2 is at the start: 2^2 + 2^2 = 8.
  EXPECT_NEAR(p.grad_bound, 1.5 * 8.0, 1e-12);
  EXPECT_NEAR(p.initial_gap, 0.5 * 4 + 0.5 * 2 * 1, 1e-12);
  EXPECT_EQ(p.sigma2, 1.0);
}

TEST(RoundUnits, DiscussionFormulas) {
  EXPECT_EQ(embedding_round_units(20), 80u);
  EXPECT_EQ(prediction_round_units(20, 3), 120u);
}

RoundLedger simulated_ledger(std::size_t passive, std::size_t per_round,
                             std::size_t rounds_per_epoch, std::size_t epochs) {
  RoundLedger ledger(passive, per_round);
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t r = 0; r < rounds_per_epoch; ++r) {
      for (std::size_t k = 1; k <= passive; ++k) {
        for (std::size_t m = 0; m < per_round / 2; ++m) {
          ledger.record(Phase::kTrain, e, k, Direction::kUp, MsgType::kPrediction, 100);
          ledger.record(Phase::kTrain, e, k, Direction::kDown, MsgType::kLossAndGrad, 50);
        }
      }
      ledger.end_round(e);
    }
  }
  return ledger;
}

TEST(LedgerCheck, ClosedFormCount) {
  const auto ledger = simulated_ledger(3, 4, 8, 2);
  const auto r = ledger_check(ledger, 2, 3, 1000, 128);
  EXPECT_EQ(r.rounds_per_epoch, 8u);
  EXPECT_EQ(r.expected_per_passive, 64u);
  EXPECT_EQ(r.observed_per_passive, (std::vector<std::uint64_t>{64, 64, 64}));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(ledger.total(Phase::kTrain).bytes, 3u * 2 * 8 * (200 + 100));
  EXPECT_EQ(ledger.by_type(Phase::kTrain, MsgType::kPrediction).messages, 96u);
}

TEST(LedgerCheck, DetectsMissingMessage) {
  auto ledger = simulated_ledger(2, 2, 4, 1);
  ledger.record(Phase::kTrain, 0, 2, Direction::kUp, MsgType::kPrediction, 1);
  const auto r = ledger_check(ledger, 1, 2, 100, 25);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.observed_per_passive[1], 9u);
}

TEST(LedgerCheck, PhasesAreSeparate) {
  auto ledger = simulated_ledger(1, 4, 2, 1);
  ledger.record(Phase::kSetup, 0, 1, Direction::kUp, MsgType::kPublicKey, 40);
  ledger.record(Phase::kEval, 0, 1, Direction::kUp, MsgType::kMaskedEmbedding, 40);
  EXPECT_TRUE(ledger_check(ledger, 1, 1, 20, 10).exact);
  EXPECT_EQ(ledger.total(Phase::kSetup).messages, 1u);
}

TEST(LedgerReport, EchoesFormulas) {
  const auto ledger = simulated_ledger(3, 4, 1, 20);
  const auto text = format_report(ledger_check(ledger, 20, 3, 10, 10));
  EXPECT_NE(text.find("1 x 4 x 20 = 80"), std::string::npos) << text;
  EXPECT_NE(text.find("3 x 2 x 20 = 120"), std::string::npos) << text;
}

TEST(Records, EmptyRun) {
  RunTracker t;
  EXPECT_TRUE(t.empty());
  EXPECT_TRUE(t.final_epoch().empty());
  EXPECT_EQ(to_csv(t.records()), std::string(kCsvHeader) + "\n");
}

TEST(Records, OneEpochFourParties) {
  RunTracker t;
  for (std::size_t k = 0; k < 4; ++k) t.append({k, 1, 0.5, 0.9, 3, 3, 120});
  EXPECT_EQ(t.records().size(), 4u);
  EXPECT_EQ(t.final_epoch().size(), 4u);
}

TEST(Records, CsvRoundTripIsLossless) {
  Rng rng(1);
  std::vector<EpochRecord> recs;
  for (std::size_t i = 0; i < 50; ++i) {
    recs.push_back({i % 4, 1 + i / 4, rng.normal(0, 10), rng.uniform01(),
                    rng.next_u64(), rng.next_u64() >> 7, rng.next_u64() >> 3});
  }
  recs.push_back({0, 99, 1e-310, 1.0 / 3.0, 0, 0, 0});
  EXPECT_EQ(parse_csv(to_csv(recs)), recs);
}

TEST(Records, ParseRejectsBadInput) {
  EXPECT_THROW(parse_csv("party,epoch\n"), Error);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\n0,1,x,0,0,0,0\n"), Error);
}

}  // namespace
}  // namespace vfmh::metrics
