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

#include "vfmh/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/random.hpp"

namespace vfmh::data {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::size_t infer_classes(const std::vector<int>& labels) {
  int m = -1;
  for (int y : labels) {
    if (y < 0) throw DataError("negative label " + std::to_string(y));
    m = std::max(m, y);
  }
  return static_cast<std::size_t>(m + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    std::string_view f = line.substr(start, pos - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
      f.remove_suffix(1);
    out.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void Dataset::validate() const {
  if (features.rank() != 2) throw DataError("features must be a matrix");
  if (features.rows() != labels.size()) {
    throw DataError(std::to_string(features.rows()) + " feature rows but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
  if (row_shape.size() != features.cols()) {
    throw DataError("row shape does not cover " +
                    std::to_string(features.cols()) + " features");
  }
}

ImageShape shard_image(ImageShape row_shape, std::size_t lo, std::size_t hi) {
  const std::size_t width = hi - lo;
  if (row_shape.channels == 1 && row_shape.width > 1 &&
      lo % row_shape.width == 0 && width % row_shape.width == 0) {
    return {1, width / row_shape.width, row_shape.width};
  }
  const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(width)));
  for (std::size_t s : {side, side + 1}) {
    if (s * s == width) return {1, s, s};
  }
  return {1, 1, width};
}

VerticalSplit vertical_split(const Dataset& dataset, std::size_t parties) {
  const std::size_t f = dataset.num_features();
  if (parties == 0) throw DataError("need at least one party");
  if (f < parties) {
    throw DataError(std::to_string(f) + " features cannot be split across " +
                    std::to_string(parties) + " parties");
  }
  const std::size_t width = f / parties;
  VerticalSplit out;
  out.labels = dataset.labels;
  out.num_classes = dataset.num_classes;
  const std::size_t n = dataset.size();
  for (std::size_t k = 0; k < parties; ++k) {
    FeatureShard shard;
    shard.owner = k;
    shard.lo = k * width;
    shard.hi = k + 1 == parties ? f : (k + 1) * width;
    shard.features = Tensor::matrix(n, shard.hi - shard.lo);
    for (std::size_t i = 0; i < n; ++i) {
      auto src = dataset.features.row(i).subspan(shard.lo, shard.hi - shard.lo);
      std::copy(src.begin(), src.end(), shard.features.row(i).begin());
    }
    shard.image = shard_image(dataset.row_shape, shard.lo, shard.hi);
    out.shards.push_back(std::move(shard));
  }
  return out;
}

Dataset take_rows(const Dataset& dataset, std::size_t offset,
                  std::size_t count) {
  if (offset + count > dataset.size()) {
    throw DataError("row range exceeds dataset size " +
                    std::to_string(dataset.size()));
  }
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), offset);
  Dataset out;
  out.features = gather_rows(dataset.features, idx);
  out.labels.assign(dataset.labels.begin() + static_cast<std::ptrdiff_t>(offset),
                    dataset.labels.begin() +
                        static_cast<std::ptrdiff_t>(offset + count));
  out.num_classes = dataset.num_classes;
  out.row_shape = dataset.row_shape;
  return out;
}

std::pair<Dataset, Dataset> split_tail(const Dataset& dataset,
                                       std::size_t test_rows) {
  if (test_rows > dataset.size()) {
    throw DataError("test split larger than the dataset");
  }
  const std::size_t train = dataset.size() - test_rows;
  return {take_rows(dataset, 0, train), take_rows(dataset, train, test_rows)};
}

Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels, std::size_t max_rows) {
  std::ifstream img = open_in(images);
  std::ifstream lab = open_in(labels);
  const std::uint32_t im_magic = read_be32(img, images);
  if (im_magic != kImageMagic) {
    throw DataError("bad image magic in " + images.string());
  }
  const std::uint32_t lb_magic = read_be32(lab, labels);
  if (lb_magic != kLabelMagic) {
    throw DataError("bad label magic in " + labels.string());
  }
  const std::uint32_t n_img = read_be32(img, images);
  const std::uint32_t rows = read_be32(img, images);
  const std::uint32_t cols = read_be32(img, images);
  const std::uint32_t n_lab = read_be32(lab, labels);
  if (n_img != n_lab) {
    throw DataError("image count " + std::to_string(n_img) +
                    " does not match label count " + std::to_string(n_lab));
  }
  std::size_t n = n_img;
  if (max_rows != 0) n = std::min<std::size_t>(n, max_rows);
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  Dataset ds;
  ds.row_shape = {1, rows, cols};
  ds.features = Tensor::matrix(n, pixels);
  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()),
                  static_cast<std::streamsize>(pixels))) {
      throw DataError("truncated image data in " + images.string() +
                      ": header promises " + std::to_string(n_img) +
                      " images, record " + std::to_string(i) + " is short");
    }
    auto row = ds.features.row(i);
    for (std::size_t p = 0; p < pixels; ++p) row[p] = buf[p] / 255.0;
  }
  ds.labels.resize(n);
  std::vector<unsigned char> lbuf(n);
  if (n > 0 && !lab.read(reinterpret_cast<char*>(lbuf.data()),
                         static_cast<std::streamsize>(n))) {
    throw DataError("truncated label data in " + labels.string());
  }
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = lbuf[i];
  ds.num_classes = std::max<std::size_t>(infer_classes(ds.labels), 1);
  // MNIST-style data always has ten classes even in small subsets.
  if (ds.num_classes <= 10) ds.num_classes = 10;
  ds.validate();
  return ds;
}

void write_idx(const std::filesystem::path& images,
               const std::filesystem::path& labels, const Dataset& dataset) {
  dataset.validate();
  if (dataset.row_shape.channels != 1) {
    throw DataError("IDX writer supports single-channel images only");
  }
  std::ofstream img = open_out(images);
  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(dataset.size()));
  write_be32(img, static_cast<std::uint32_t>(dataset.row_shape.height));
  write_be32(img, static_cast<std::uint32_t>(dataset.row_shape.width));
  for (double v : dataset.features.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("IDX pixels must lie in [0, 1]");
    }
    img.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  std::ofstream lab = open_out(labels);
  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(dataset.size()));
  for (int y : dataset.labels) {
    if (y > 255) throw DataError("IDX labels must fit in a byte");
    lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  }
  if (!img || !lab) throw DataError("failed writing IDX files");
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], row[i])) numeric = false;
    }
    if (!numeric) {
      if (labels.empty() && width == 0 && line_no == 1) continue;  // header
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": non-numeric field");
    }
    if (fields.size() < 2) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": need at least one feature and a label");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(width) + " fields");
    }
    const double y = row.back();
    if (y != std::floor(y) || y < 0) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": label must be a non-negative integer");
    }
    labels.push_back(static_cast<int>(y));
    values.insert(values.end(), row.begin(), row.end() - 1);
  }
  if (labels.empty()) throw DataError(path.string() + " contains no rows");
  Dataset ds;
  ds.features = Tensor({labels.size(), width - 1}, std::move(values));
  ds.labels = std::move(labels);
  ds.num_classes = infer_classes(ds.labels);
  ds.row_shape = {1, 1, width - 1};
  ds.validate();
  return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset) {
  dataset.validate();
  std::ofstream out = open_out(path);
  for (std::size_t f = 0; f < dataset.num_features(); ++f) out << 'f' << f << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out.write(buf, ptr - buf);
      out.put(',');
    }
    out << dataset.labels[i] << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset synth_blobs(const BlobParams& params) {
  if (params.classes == 0 || params.features == 0) {
    throw DataError("blobs need at least one class and one feature");
  }
  if (params.n < params.classes) {
    throw DataError("need at least one sample per class");
  }
  Rng rng(params.seed);
  Dataset ds;
  ds.num_classes = params.classes;
  ds.row_shape = {1, 1, params.features};
  ds.features = Tensor::matrix(params.n, params.features);
  ds.labels.resize(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    const std::size_t c = i % params.classes;
    ds.labels[i] = static_cast<int>(c);
    auto row = ds.features.row(i);
    for (std::size_t f = 0; f < params.features; ++f) {
      const double mean = f % params.classes == c ? params.separation : 0.0;
      row[f] = params.spread > 0.0 ? rng.normal(mean, params.spread) : mean;
    }
  }
  return ds;
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n,
                                                 std::size_t batch_size,
                                                 std::size_t epoch,
                                                 std::uint64_t seed) {
  if (batch_size == 0) throw DataError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace vfmh::data
