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

#ifndef VFMH_CLI_CONFIG_HPP_
#define VFMH_CLI_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/optim/optimizer.hpp"

namespace vfmh::cli {

enum class DataSource { kBlobs, kIdx, kCsv };
enum class Method { kVfedmh, kLocal, kAggVfl };
enum class TransportKind { kInMemory, kTcp };
enum class BoundProblem { kLogistic, kQuadratic };

std::string_view method_name(Method method);

struct PartySettings {
  Architecture arch = Architecture::kMlp3;
  std::string layers;  // for Architecture::kCustom
  optim::OptimizerConfig optimizer;
  std::optional<std::uint64_t> init_seed;
};

struct ExperimentConfig {
  // data.*
  DataSource source = DataSource::kBlobs;
  std::size_t blob_n = 4000;
  std::size_t test_n = 1000;
  std::size_t classes = 10;
  std::size_t features = 64;
  double spread = 0.5;
  double separation = 1.0;
  std::uint64_t data_seed = 1;
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  std::size_t max_train = 2000;
  std::size_t max_test = 1000;
  std::filesystem::path csv;

  // session.* and party.*
  std::size_t num_passive = 3;
  std::vector<PartySettings> parties;  // num_passive + 1 entries

  // training.*
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  std::size_t embedding_dim = 64;
  bool evaluate = true;

  // secure.*
  std::string group = "p256";
  int scale_bits = 16;
  bool test_mode = false;
  bool masking = true;

  // transport.*
  TransportKind transport = TransportKind::kInMemory;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::size_t timeout_ms = 120000;

  Method method = Method::kVfedmh;
  std::filesystem::path output_dir = "out";

  // bound.*
  BoundProblem bound_problem = BoundProblem::kLogistic;
  double bound_lambda = 0.1;
  std::size_t bound_steps = 200;
  std::size_t bound_seeds = 20;
  std::optional<double> bound_lr;  // absolute step; default 1/L
  double bound_lr_scale = 1.0;     // step = scale / L when bound_lr unset
  std::vector<double> bound_curvature{2.0};
  std::size_t bound_rows = 1000;  // rows of the calibration set
  double bound_max_violation = 0.05;
};

// Parses "key = value" lines; '#' starts a comment. Unknown keys, bad
// values and duplicates throw ConfigError naming origin:line and the key.
// Relative data paths are resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view text,
                              std::string_view origin = "<config>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Every recognised key, for help output.
std::vector<std::string> known_keys();

}  // namespace vfmh::cli

#endif  // VFMH_CLI_CONFIG_HPP_
