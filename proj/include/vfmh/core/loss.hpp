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

#ifndef VFMH_CORE_LOSS_HPP_
#define VFMH_CORE_LOSS_HPP_

#include <cstddef>
#include <span>

#include "vfmh/core/tensor.hpp"

namespace vfmh {

struct LossResult {
  double loss = 0.0;
  // d(loss)/d(logits), already divided by the batch size.
  Tensor grad_logits;
};

// Mean softmax cross-entropy over the batch, using a max-shifted
// log-sum-exp so that large logits do not overflow.
LossResult softmax_cross_entropy(const Tensor& logits,
                                 std::span<const int> labels);

// Row-wise argmax; ties resolve to the lowest class index.
std::size_t argmax_row(std::span<const double> row);

// Fraction of rows whose argmax equals the label.
double accuracy(const Tensor& logits, std::span<const int> labels);

}  // namespace vfmh

#endif  // VFMH_CORE_LOSS_HPP_
