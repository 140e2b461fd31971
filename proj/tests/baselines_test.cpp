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

#include <cmath>

#include "support/checks.hpp"
#include "support/sessions.hpp"
#include "vfmh/baselines/baselines.hpp"
#include "vfmh/core/finite_diff.hpp"
#include "vfmh/core/loss.hpp"
#include "vfmh/metrics/ledger.hpp"

namespace vfmh::baselines {
namespace {

using testing::small_session;

TEST(Local, SeparableBlobsAreLearnedFromOneSlice) {
  auto s = small_session({.spread = 0.0, .epochs = 5});
  const auto r = run_local(s.data[0], s.config.parties[0], 5, 64, s.config.seed);
  ASSERT_EQ(r.tracker.records().size(), 5u);
  EXPECT_GE(r.tracker.records().back().test_acc, 0.99);
  for (const auto& rec : r.tracker.records()) {
    EXPECT_EQ(rec.msgs_up + rec.msgs_down + rec.bytes, 0u);
    EXPECT_EQ(rec.party, 0u);
  }
}

TEST(Local, ZeroEpochsLeaveTheInitialModel) {
  auto s = small_session({.spread = 0.0});
  const auto& pc = s.config.parties[0];
  const auto r = run_local(s.data[0], pc, 0, 64, 1);
  EXPECT_EQ(r.model, init_network(pc.spec, pc.init_seed));
  EXPECT_TRUE(r.tracker.empty());
}

TEST(Local, UntrainedModelIsNearChance) {
  // Ten classes on balanced data: average several initialisations.
  auto s = small_session({.rows = 100, .test_rows = 1000, .classes = 10});
  double acc = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto pc = s.config.parties[0];
    pc.init_seed = seed;
    const auto logits = forward(init_network(pc.spec, pc.init_seed), pc.spec, Segment::kFull, s.data[0].test).output;
    acc += accuracy(logits, s.data[0].test_labels) / 10;
  }
  EXPECT_NEAR(acc, 0.1, 0.05);
}

TEST(AveragedLoss, IdenticalLogitsAverageToThemselves) {
  Rng rng(2);
  const Tensor r = testing::random_tensor({4, 3}, rng);
  const std::vector<int> y{0, 2, 1, 1};
  const auto avg = averaged_logit_loss({{0, r}, {1, r}, {2, r}}, y);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(avg.mean_logits[i], r[i], 1e-15);
  const auto direct = softmax_cross_entropy(r, y);
  EXPECT_NEAR(avg.loss, direct.loss, 1e-14);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(avg.grad_per_party[i], direct.grad_logits[i] / 3, 1e-15);
  }
}

TEST(AveragedLoss, SinglePartyIsPlainCrossEntropy) {
  Rng rng(5);
  const Tensor r = testing::random_tensor({6, 4}, rng);
  const auto y = testing::random_labels(6, 4, rng);
  const auto avg = averaged_logit_loss({{0, r}}, y);
  const auto direct = softmax_cross_entropy(r, y);
  EXPECT_EQ(avg.loss, direct.loss);
  EXPECT_EQ(avg.grad_per_party, direct.grad_logits);
}

TEST(AveragedLoss, RejectsMismatchedShapes) {
  EXPECT_THROW(averaged_logit_loss({{0, Tensor({2, 3})}, {1, Tensor({2, 4})}},
                                   std::vector<int>{0, 1}),
               ShapeError);
}

class AggVflGradient : public ::testing::TestWithParam<int> {};

// Party k's backprop of the shared logit gradient must match finite
// differences of the averaged-logit loss in that party's parameters.
TEST_P(AggVflGradient, MatchesFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  const std::size_t c = 3, batch = 5, m = 4;
  Rng rng(seed);
  std::vector<NetworkSpec> specs;
  std::vector<NetworkState> states;
  std::vector<Tensor> inputs;
  for (std::size_t k = 0; k < c; ++k) {
    specs.push_back(parse_network_spec("dense:5|dense:" + std::to_string(m),
                                       ImageShape{1, 1, 3 + k}, 5, m));
    states.push_back(testing::random_state(specs[k], mix_seed(seed, k)));
    inputs.push_back(testing::random_tensor({batch, 3 + k}, rng));
  }
  const auto y = testing::random_labels(batch, m, rng);
  const auto loss_with = [&](std::size_t k, const NetworkState& sk) {
    std::map<protocol::PartyIndex, Tensor> preds;
    for (std::size_t j = 0; j < c; ++j) {
      preds[j] = forward(j == k ? sk : states[j], specs[j], Segment::kFull, inputs[j]).output;
    }
    return averaged_logit_loss(preds, y);
  };
  for (std::size_t k = 0; k < c; ++k) {
    const auto avg = loss_with(k, states[k]);
    const auto fwd = forward(states[k], specs[k], Segment::kFull, inputs[k]);
    const auto back = backward(states[k], specs[k], fwd.trace, avg.grad_per_party);
    NetworkState probe = states[k];
    const auto fd = finite_diff_gradient(
        probe, [&](const NetworkState& s) { return loss_with(k, s).loss; }, 1e-3);
    EXPECT_LT(testing::relative_error(back.param_grads, fd), 1e-4) << "party " << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AggVflGradient, ::testing::Range(1, 11));

TEST(AggVfl, LedgerCountsTwoMessagesPerRound) {
  auto s = small_session({.rows = 300, .epochs = 2});
  const auto r = run_aggvfl(s.config, s.data);
  EXPECT_EQ(r.ledger.messages_per_round(), 2u);
  const auto report = metrics::ledger_check(r.ledger, 2, 4, 300, 64);
  EXPECT_EQ(report.expected_per_passive, 2u * 5 * 2);
  EXPECT_TRUE(report.exact);
  EXPECT_EQ(r.ledger.total(metrics::Phase::kSetup).messages, 0u);
  EXPECT_EQ(r.joint_accuracy.size(), 2u);
  EXPECT_EQ(r.tracker.records().size(), 8u);
}

TEST(AggVfl, TrainingReducesLossAndIsDeterministic) {
  auto s = small_session({.epochs = 4});
  const auto a = run_aggvfl(s.config, s.data);
  const auto b = run_aggvfl(s.config, s.data);
  EXPECT_EQ(a.models, b.models);
  EXPECT_EQ(a.tracker.records(), b.tracker.records());
  const auto& recs = a.tracker.records();
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LT(recs[12 + k].train_loss, recs[k].train_loss) << "party " << k;
  }
  EXPECT_GT(a.joint_accuracy.back(), 0.5);
}

TEST(Names, BaselineKinds) {
  EXPECT_EQ(baseline_name(BaselineKind::kLocal), "local");
  EXPECT_EQ(baseline_name(BaselineKind::kAggVfl), "aggvfl");
}

}  // namespace
}  // namespace vfmh::baselines
