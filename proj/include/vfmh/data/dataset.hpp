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

#ifndef VFMH_DATA_DATASET_HPP_
#define VFMH_DATA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/core/tensor.hpp"

namespace vfmh::data {

struct Dataset {
  Tensor features;  // N x F
  std::vector<int> labels;
  std::size_t num_classes = 0;
  // Layout of one feature row, e.g. 1x28x28 for MNIST or 1x1xF for tabular
  // data.
  ImageShape row_shape;

  std::size_t size() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }
  // Throws DataError on a row/label count mismatch or label >= M.
  void validate() const;
};

// Contiguous columns [lo, hi) owned by one party, all rows in dataset order.
struct FeatureShard {
  std::size_t owner = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  Tensor features;
  // How the shard is fed to convolutional models.
  ImageShape image;
};

struct VerticalSplit {
  std::vector<FeatureShard> shards;  // shards[0] belongs to the active party
  std::vector<int> labels;           // retained by the active party
  std::size_t num_classes = 0;
};

// Equal-width contiguous slices; the last shard takes the remainder.
VerticalSplit vertical_split(const Dataset& dataset, std::size_t parties);

// Spatial layout for columns [lo, hi) of rows laid out as `row_shape`:
// whole image rows when the slice covers them, else the largest square,
// else a 1 x width strip.
ImageShape shard_image(ImageShape row_shape, std::size_t lo, std::size_t hi);

// Splits off the last `test_rows` rows.
std::pair<Dataset, Dataset> split_tail(const Dataset& dataset,
                                       std::size_t test_rows);
Dataset take_rows(const Dataset& dataset, std::size_t offset,
                  std::size_t count);

// IDX (big-endian headers, magic 0x00000803 for images and 0x00000801 for
// labels). Pixels become value / 255. `max_rows` == 0 loads everything.
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels,
                 std::size_t max_rows = 0);
// Writes features rounded to round(255 * x); expects values in [0, 1] and a
// row_shape of 1 x H x W.
void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const Dataset& dataset);

// Numeric CSV with the label in the last column; an optional header row is
// detected and skipped.
Dataset load_csv(const std::filesystem::path& path);
// Writes a header row and full-precision values.
void write_csv(const std::filesystem::path& path, const Dataset& dataset);

struct BlobParams {
  std::size_t n = 4000;
  std::size_t classes = 10;
  std::size_t features = 64;
  double spread = 0.5;      // per-coordinate standard deviation
  double separation = 1.0;  // simplex scale
  std::uint64_t seed = 1;
};

// Class c has mean separation * [f mod M == c] in coordinate f, so every
// contiguous column slice carries some evidence for most classes. Row i
// has label i mod M.
Dataset synth_blobs(const BlobParams& params);

// Deterministic permutation of 0..N-1 for (seed, epoch), cut into batches.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n,
                                                 std::size_t batch_size,
                                                 std::size_t epoch,
                                                 std::uint64_t seed);

inline std::size_t num_batches(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

}  // namespace vfmh::data

#endif  // VFMH_DATA_DATASET_HPP_
