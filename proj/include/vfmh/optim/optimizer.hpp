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

#ifndef VFMH_OPTIM_OPTIMIZER_HPP_
#define VFMH_OPTIM_OPTIMIZER_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vfmh/core/tensor.hpp"

namespace vfmh::optim {

enum class Kind { kSgd, kMomentum, kAdagrad, kAdam };

std::string_view kind_name(Kind kind);
Kind parse_kind(std::string_view name);

struct OptimizerConfig {
  Kind kind = Kind::kSgd;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double adagrad_epsilon = 1e-10;

  // Throws ConfigError unless η > 0 and every decay lies in [0, 1).
  void validate() const;
};

// Party-local accumulators. `first` holds the momentum velocity, the
// Adagrad squared-gradient sum or the Adam first moment; `second` the Adam
// second moment.
struct OptimizerState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::uint64_t step = 0;
};

OptimizerState init_state(const OptimizerConfig& cfg,
                          std::span<const Tensor> params);

// One in-place update. SGD is θ ← θ - η g; the other kinds follow their
// usual definitions (velocity v ← βv + g; Adagrad G ← G + g²;
// bias-corrected Adam). Throws NumericError naming the first non-finite
// gradient tensor, before touching any parameter.
void step(const OptimizerConfig& cfg, OptimizerState& state,
          std::span<Tensor> params, std::span<const Tensor> grads);

}  // namespace vfmh::optim

#endif  // VFMH_OPTIM_OPTIMIZER_HPP_
