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

#include "vfmh/core/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vfmh/core/errors.hpp"

namespace vfmh {

LossResult softmax_cross_entropy(const Tensor& logits,
                                 std::span<const int> labels) {
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  if (batch == 0) throw ShapeError("softmax_cross_entropy on an empty batch");
  if (labels.size() != batch) {
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not match batch " + std::to_string(batch));
  }
  LossResult out;
  out.grad_logits = logits.zeros_like();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    const int y = labels[n];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ShapeError("label " + std::to_string(y) + " out of range for " +
                       std::to_string(classes) + " classes");
    }
    auto row = logits.row(n);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double log_z = m + std::log(z);
    total += log_z - row[y];
    auto g = out.grad_logits.row(n);
    for (std::size_t c = 0; c < classes; ++c) {
      g[c] = std::exp(row[c] - log_z) * inv_batch;
    }
    g[y] -= inv_batch;
  }
  out.loss = total * inv_batch;
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss");
  return out;
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t n = 0; n < logits.rows(); ++n) {
    if (argmax_row(logits.row(n)) == static_cast<std::size_t>(labels[n])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

}  // namespace vfmh
