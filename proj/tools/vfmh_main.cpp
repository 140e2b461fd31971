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

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "vfmh/cli/config.hpp"
#include "vfmh/cli/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-party vertical federated learning with secure embedding aggregation"};
  app.require_subcommand(1);

  std::string run_config;
  int run_party = -1;
  auto* run = app.add_subcommand("run", "Train a session and write metrics.csv and summary.json");
  run->add_option("-c,--config", run_config, "Config file")->required();
  run->add_option("--party", run_party,
                  "Run only this party of a TCP session (0 hosts the hub)")
      ->check(CLI::NonNegativeNumber);

  std::string bound_config;
  auto* bound = app.add_subcommand("bound-check", "Check the convergence bound on the convex calibration problem");
  bound->add_option("-c,--config", bound_config, "Config file")->required();

  vfmh::cli::SynthOptions synth_opts;
  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob dataset as CSV");
  synth->add_option("-o,--out", synth_dir, "Output directory")->required();
  synth->add_option("--n", synth_opts.blobs.n, "Rows")->capture_default_str();
  synth->add_option("--classes", synth_opts.blobs.classes, "Classes")->capture_default_str();
  synth->add_option("--features", synth_opts.blobs.features, "Features")->capture_default_str();
  synth->add_option("--spread", synth_opts.blobs.spread, "Per-coordinate standard deviation")->capture_default_str();
  synth->add_option("--separation", synth_opts.blobs.separation, "Distance scale of class means")->capture_default_str();
  synth->add_option("--seed", synth_opts.blobs.seed, "Seed")->capture_default_str();

  std::string summary_path;
  std::size_t models = 0;
  auto* ledger = app.add_subcommand("ledger", "Print round accounting from a summary.json");
  ledger->add_option("summary", summary_path, "summary.json of a run")->required();
  ledger->add_option("--models", models, "Models in the comparison scenario");

  auto* keys = app.add_subcommand("keys", "List recognised config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    std::optional<std::size_t> party;
    if (run_party >= 0) party = static_cast<std::size_t>(run_party);
    return vfmh::cli::cmd_run(run_config, party, std::cout, std::cerr);
  }
  if (*bound) return vfmh::cli::cmd_bound_check(bound_config, std::cout, std::cerr);
  if (*synth) {
    synth_opts.out_dir = synth_dir;
    return vfmh::cli::cmd_synth(synth_opts, std::cout, std::cerr);
  }
  if (*ledger) {
    std::optional<std::size_t> m;
    if (ledger->count("--models") > 0) m = models;
    return vfmh::cli::cmd_ledger(summary_path, m, std::cout, std::cerr);
  }
  if (*keys) {
    for (const auto& k : vfmh::cli::known_keys()) std::cout << k << "\n";
  }
  return 0;
}
