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

#ifndef VFMH_CORE_NETWORK_HPP_
#define VFMH_CORE_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vfmh/core/tensor.hpp"

namespace vfmh {

// Spatial interpretation of a flat feature row.
struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
};

// Valid-padding 2-D convolution. Weights are [out_ch, in_ch, kh, kw].
struct ConvLayer {
  ImageShape input;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;

  ImageShape output() const {
    return {out_channels, (input.height - kernel_h) / stride + 1,
            (input.width - kernel_w) / stride + 1};
  }
};

// Non-overlapping max pooling; window == stride, trailing rows/cols dropped.
struct MaxPoolLayer {
  ImageShape input;
  std::size_t window_h = 2;
  std::size_t window_w = 2;

  ImageShape output() const {
    return {input.channels, input.height / window_h, input.width / window_w};
  }
};

struct ReluLayer {
  std::size_t width = 0;
};

using LayerSpec = std::variant<DenseLayer, ConvLayer, MaxPoolLayer, ReluLayer>;

std::size_t layer_input_width(const LayerSpec& layer);
std::size_t layer_output_width(const LayerSpec& layer);
// Number of parameter tensors the layer owns (weights and bias, or none).
std::size_t layer_param_tensors(const LayerSpec& layer);
std::string layer_name(const LayerSpec& layer);

enum class Architecture { kMlp3, kCnn2, kLenet, kCustom };

std::string_view architecture_name(Architecture arch);
Architecture parse_architecture(std::string_view name);

// Layer list of one party's model. Layers [0, split_index) are the
// embedding network, the rest the decision network.
struct NetworkSpec {
  Architecture arch = Architecture::kCustom;
  std::vector<LayerSpec> layers;
  std::size_t embedding_dim = 0;
  std::size_t split_index = 0;
  std::size_t num_classes = 0;

  std::size_t input_width() const;
  // Throws ShapeError if adjacent widths, the embedding width or the class
  // count are inconsistent.
  void validate() const;
  // True when the decision network is a single affine map, i.e. the loss is
  // convex in the decision parameters once embeddings are fixed.
  bool decision_is_affine() const;
};

// Builds one of the stock architectures for the given input image.
//   MLP3:  three dense layers.
//   CNN2:  two convolutions, two dense layers.
//   LENET: three convolutions, one max pool, three dense layers.
// Kernel and pool windows shrink to fit small inputs.
NetworkSpec make_network_spec(Architecture arch, ImageShape input,
                              std::size_t embedding_dim,
                              std::size_t num_classes);

// Parses a layer list such as "conv:8:3,relu,pool,dense:64,relu|dense:10".
// Tokens: dense:OUT, conv:OUT_CH:K[:STRIDE], pool, relu. The '|' marks the
// embedding/decision split.
NetworkSpec parse_network_spec(std::string_view layers, ImageShape input,
                               std::size_t embedding_dim,
                               std::size_t num_classes);

struct NetworkState {
  std::vector<Tensor> params;

  std::size_t param_count() const;
  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

// Glorot-uniform weights, zero biases.
NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed);

enum class Segment { kEmbedding, kDecision, kFull };

struct ParamRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

ParamRange param_range(const NetworkSpec& spec, Segment segment);

struct ForwardTrace {
  Segment segment = Segment::kFull;
  std::size_t batch = 0;
  std::size_t first_layer = 0;
  // Input of every traversed layer.
  std::vector<Tensor> inputs;
  // Flat argmax offsets for pooling layers; empty for other layers.
  std::vector<std::vector<std::uint32_t>> pool_argmax;
};

struct ForwardResult {
  Tensor output;
  ForwardTrace trace;
};

struct BackwardResult {
  // Gradients for params[range.begin, range.end) of the traversed segment.
  std::vector<Tensor> param_grads;
  Tensor grad_input;
};

ForwardResult forward(const NetworkState& state, const NetworkSpec& spec,
                      Segment segment, const Tensor& input);
BackwardResult backward(const NetworkState& state, const NetworkSpec& spec,
                        const ForwardTrace& trace, const Tensor& grad_output);

inline ForwardResult forward_embedding(const NetworkState& state,
                                       const NetworkSpec& spec,
                                       const Tensor& batch) {
  return forward(state, spec, Segment::kEmbedding, batch);
}

inline ForwardResult forward_decision(const NetworkState& state,
                                      const NetworkSpec& spec,
                                      const Tensor& global_embedding) {
  return forward(state, spec, Segment::kDecision, global_embedding);
}

BackwardResult backward_decision(const NetworkState& state,
                                 const NetworkSpec& spec,
                                 const ForwardTrace& trace,
                                 const Tensor& grad_logits);

std::vector<Tensor> backward_embedding(const NetworkState& state,
                                       const NetworkSpec& spec,
                                       const ForwardTrace& trace,
                                       const Tensor& grad_embedding);

}  // namespace vfmh

#endif  // VFMH_CORE_NETWORK_HPP_
