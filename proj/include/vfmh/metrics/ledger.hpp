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

#ifndef VFMH_METRICS_LEDGER_HPP_
#define VFMH_METRICS_LEDGER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "vfmh/transport/message.hpp"

namespace vfmh::metrics {

// Key exchange, training rounds, and evaluation rounds are tallied apart so
// that the per-round accounting covers training traffic only.
enum class Phase { kSetup, kTrain, kEval };
enum class Direction { kUp, kDown };  // up = passive to active

std::string_view phase_name(Phase phase);

struct Tally {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

// Message counts seen by the active party, per phase, epoch and passive
// party. Single writer.
class RoundLedger {
 public:
  RoundLedger() = default;
  RoundLedger(std::size_t num_passive, std::size_t messages_per_round);

  std::size_t num_passive() const { return num_passive_; }
  // 4 for embedding aggregation, 2 for prediction aggregation.
  std::size_t messages_per_round() const { return messages_per_round_; }

  void record(Phase phase, std::size_t epoch, std::size_t passive,
              Direction dir, transport::MsgType type, std::size_t bytes);
  // Marks the end of one training round in `epoch`.
  void end_round(std::size_t epoch);

  Tally tally(Phase phase, std::size_t epoch, std::size_t passive,
              Direction dir) const;
  // Summed over epochs.
  Tally total(Phase phase, std::size_t passive, Direction dir) const;
  Tally total(Phase phase) const;
  Tally by_type(Phase phase, transport::MsgType type) const;
  std::size_t rounds(std::size_t epoch) const;
  std::size_t total_rounds() const;
  std::size_t epochs() const;

 private:
  using Key = std::tuple<Phase, std::size_t, std::size_t, Direction>;
  std::size_t num_passive_ = 0;
  std::size_t messages_per_round_ = 0;
  std::map<Key, Tally> cells_;
  std::map<std::pair<Phase, transport::MsgType>, Tally> types_;
  std::map<std::size_t, std::size_t> rounds_;
};

struct LedgerReport {
  std::size_t epochs = 0;
  std::size_t num_models = 0;
  std::size_t rounds_per_epoch = 0;
  // Closed form: messages_per_round * ceil(N / batch) * T per passive party.
  std::uint64_t expected_per_passive = 0;
  // Training messages observed for each passive party, index k - 1.
  std::vector<std::uint64_t> observed_per_passive;
  bool exact = true;
  // Round-unit totals when training `num_models` models: one joint run with
  // four communications per round for embedding aggregation, versus one run
  // per model with two communications per round for prediction aggregation.
  std::uint64_t embedding_total = 0;
  std::uint64_t prediction_total = 0;
};

// Embedding-aggregation total: 1 x 4 x T.
std::uint64_t embedding_round_units(std::size_t epochs);
// Prediction-aggregation total: num_models x 2 x T.
std::uint64_t prediction_round_units(std::size_t epochs,
                                     std::size_t num_models);

LedgerReport ledger_check(const RoundLedger& ledger, std::size_t epochs,
                          std::size_t num_models, std::size_t num_samples,
                          std::size_t batch_size);

std::string format_report(const LedgerReport& report);

}  // namespace vfmh::metrics

#endif  // VFMH_METRICS_LEDGER_HPP_
