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

#ifndef VFMH_CLI_EXPERIMENT_HPP_
#define VFMH_CLI_EXPERIMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vfmh/cli/config.hpp"
#include "vfmh/core/network.hpp"
#include "vfmh/data/dataset.hpp"
#include "vfmh/metrics/bound.hpp"
#include "vfmh/metrics/ledger.hpp"
#include "vfmh/metrics/records.hpp"
#include "vfmh/protocol/session.hpp"

namespace vfmh::cli {

struct LoadedData {
  data::Dataset train;
  data::Dataset test;
};

LoadedData load_data(const ExperimentConfig& config);

struct PreparedSession {
  protocol::SessionConfig session;
  std::vector<protocol::PartyData> data;  // one entry per party
};

// Vertical split of the loaded data plus one model spec and optimizer per
// party. Throws ConfigError for inconsistent settings.
PreparedSession prepare_session(const ExperimentConfig& config,
                                const LoadedData& loaded);

struct RunOutcome {
  Method method = Method::kVfedmh;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<metrics::EpochRecord> records;
  std::vector<NetworkState> models;
  // Absent for the local baseline.
  std::optional<metrics::RoundLedger> ledger;
  std::vector<double> joint_accuracy;  // aggvfl only
};

// Runs every party in this process, over the in-memory network or
// loopback TCP as configured.
RunOutcome run_experiment(const ExperimentConfig& config);

// Runs a single party of a TCP session. Party 0 listens on
// transport.host:transport.port; passive parties dial it. Only party 0
// returns records.
RunOutcome run_tcp_party(const ExperimentConfig& config, std::size_t party);

// Deterministic JSON: configuration echo, final accuracies, ledger totals.
std::string summary_json(const ExperimentConfig& config,
                         const RunOutcome& outcome);

// VFMH_OUTPUT_DIR if set, else config.output_dir.
std::filesystem::path output_dir(const ExperimentConfig& config);

// Writes metrics.csv and summary.json.
void write_outputs(const std::filesystem::path& dir,
                   const ExperimentConfig& config, const RunOutcome& outcome);

struct BoundReport {
  std::vector<metrics::BoundCheck> seeds;
  std::size_t violations = 0;
  std::size_t checked = 0;
  bool informative = true;

  double violation_rate() const {
    return checked == 0 ? 0.0 : static_cast<double>(violations) / checked;
  }
};

// Convergence-bound check over bound.seeds seeds. The logistic problem
// freezes the securely aggregated initial embeddings of the training set
// and trains the active party's decision layer with full-batch SGD.
// Throws ConfigError when that layer is not a single affine map.
BoundReport run_bound_check(const ExperimentConfig& config);

// Subcommands. Each returns the process exit code: 0 success, 1 failed
// check, 2 configuration error, 3 runtime error.
int cmd_run(const std::filesystem::path& config_path,
            std::optional<std::size_t> party, std::ostream& out,
            std::ostream& err);
int cmd_bound_check(const std::filesystem::path& config_path,
                    std::ostream& out, std::ostream& err);

// Writes <out_dir>/blobs.csv with blobs.n rows.
struct SynthOptions {
  data::BlobParams blobs;
  std::filesystem::path out_dir;
};
int cmd_synth(const SynthOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_ledger(const std::filesystem::path& summary_path,
               std::optional<std::size_t> num_models, std::ostream& out,
               std::ostream& err);

}  // namespace vfmh::cli

#endif  // VFMH_CLI_EXPERIMENT_HPP_
