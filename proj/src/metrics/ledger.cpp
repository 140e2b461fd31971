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

#include "vfmh/metrics/ledger.hpp"

#include <sstream>

namespace vfmh::metrics {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::kSetup:
      return "setup";
    case Phase::kTrain:
      return "train";
    case Phase::kEval:
      return "eval";
  }
  return "?";
}

RoundLedger::RoundLedger(std::size_t num_passive,
                         std::size_t messages_per_round)
    : num_passive_(num_passive), messages_per_round_(messages_per_round) {}

void RoundLedger::record(Phase phase, std::size_t epoch, std::size_t passive,
                         Direction dir, transport::MsgType type,
                         std::size_t bytes) {
  Tally& cell = cells_[{phase, epoch, passive, dir}];
  ++cell.messages;
  cell.bytes += bytes;
  Tally& t = types_[{phase, type}];
  ++t.messages;
  t.bytes += bytes;
}

void RoundLedger::end_round(std::size_t epoch) { ++rounds_[epoch]; }

Tally RoundLedger::tally(Phase phase, std::size_t epoch, std::size_t passive,
                         Direction dir) const {
  auto it = cells_.find({phase, epoch, passive, dir});
  return it == cells_.end() ? Tally{} : it->second;
}

Tally RoundLedger::total(Phase phase, std::size_t passive,
                         Direction dir) const {
  Tally out;
  for (const auto& [key, cell] : cells_) {
    const auto& [p, epoch, k, d] = key;
    if (p == phase && k == passive && d == dir) {
      out.messages += cell.messages;
      out.bytes += cell.bytes;
    }
  }
  return out;
}

Tally RoundLedger::total(Phase phase) const {
  Tally out;
  for (const auto& [key, cell] : cells_) {
    if (std::get<0>(key) == phase) {
      out.messages += cell.messages;
      out.bytes += cell.bytes;
    }
  }
  return out;
}

Tally RoundLedger::by_type(Phase phase, transport::MsgType type) const {
  auto it = types_.find({phase, type});
  return it == types_.end() ? Tally{} : it->second;
}

std::size_t RoundLedger::rounds(std::size_t epoch) const {
  auto it = rounds_.find(epoch);
  return it == rounds_.end() ? 0 : it->second;
}

std::size_t RoundLedger::total_rounds() const {
  std::size_t n = 0;
  for (const auto& [epoch, r] : rounds_) n += r;
  return n;
}

std::size_t RoundLedger::epochs() const { return rounds_.size(); }

std::uint64_t embedding_round_units(std::size_t epochs) {
  return 1ull * 4 * epochs;
}

std::uint64_t prediction_round_units(std::size_t epochs,
                                     std::size_t num_models) {
  return static_cast<std::uint64_t>(num_models) * 2 * epochs;
}

LedgerReport ledger_check(const RoundLedger& ledger, std::size_t epochs,
                          std::size_t num_models, std::size_t num_samples,
                          std::size_t batch_size) {
  LedgerReport r;
  r.epochs = epochs;
  r.num_models = num_models;
  r.rounds_per_epoch =
      batch_size == 0 ? 0 : (num_samples + batch_size - 1) / batch_size;
  r.expected_per_passive = static_cast<std::uint64_t>(
      ledger.messages_per_round() * r.rounds_per_epoch * epochs);
  for (std::size_t k = 1; k <= ledger.num_passive(); ++k) {
    const std::uint64_t seen =
        ledger.total(Phase::kTrain, k, Direction::kUp).messages +
        ledger.total(Phase::kTrain, k, Direction::kDown).messages;
    r.observed_per_passive.push_back(seen);
    if (seen != r.expected_per_passive) r.exact = false;
  }
  if (ledger.total_rounds() != r.rounds_per_epoch * epochs) r.exact = false;
  r.embedding_total = embedding_round_units(epochs);
  r.prediction_total = prediction_round_units(epochs, num_models);
  return r;
}

std::string format_report(const LedgerReport& r) {
  std::ostringstream out;
  out << "epochs: " << r.epochs << "\n"
      << "rounds per epoch: " << r.rounds_per_epoch << "\n"
      << "expected messages per passive party: " << r.expected_per_passive
      << "\n";
  for (std::size_t i = 0; i < r.observed_per_passive.size(); ++i) {
    out << "  party " << i + 1 << " observed: " << r.observed_per_passive[i]
        << "\n";
  }
  out << "ledger exact: " << (r.exact ? "yes" : "NO") << "\n"
      << "round units for " << r.num_models << " models over " << r.epochs
      << " epochs:\n"
      << "  embedding aggregation  1 x 4 x " << r.epochs << " = "
      << r.embedding_total << "\n"
      << "  prediction aggregation " << r.num_models << " x 2 x " << r.epochs
      << " = " << r.prediction_total << "\n";
  return out.str();
}

}  // namespace vfmh::metrics
