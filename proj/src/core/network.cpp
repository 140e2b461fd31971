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

#include "vfmh/core/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "vfmh/core/errors.hpp"
#include "vfmh/core/random.hpp"

namespace vfmh {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string width_mismatch(std::string_view what, std::size_t expected,
                           std::size_t actual) {
  return std::string(what) + ": expected width " + std::to_string(expected) +
         ", got " + std::to_string(actual);
}

// ---- per-layer kernels ----------------------------------------------------

Tensor dense_forward(const DenseLayer& l, const Tensor& w, const Tensor& b,
                     const Tensor& x) {
  const std::size_t batch = x.rows();
  Tensor y = Tensor::matrix(batch, l.out);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xr = x.data() + n * l.in;
    double* yr = y.data() + n * l.out;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* wr = w.data() + o * l.in;
      double acc = b[o];
      for (std::size_t i = 0; i < l.in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

void dense_backward(const DenseLayer& l, const Tensor& w, const Tensor& x,
                    const Tensor& dy, Tensor& dw, Tensor& db, Tensor& dx) {
  const std::size_t batch = x.rows();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xr = x.data() + n * l.in;
    const double* dyr = dy.data() + n * l.out;
    double* dxr = dx.data() + n * l.in;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      db[o] += g;
      double* dwr = dw.data() + o * l.in;
      const double* wr = w.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) {
        dwr[i] += g * xr[i];
        dxr[i] += g * wr[i];
      }
    }
  }
}

Tensor conv_forward(const ConvLayer& l, const Tensor& w, const Tensor& b,
                    const Tensor& x) {
  const ImageShape in = l.input;
  const ImageShape out = l.output();
  const std::size_t batch = x.rows();
  const std::size_t in_plane = in.height * in.width;
  const std::size_t out_plane = out.height * out.width;
  const std::size_t kk = l.kernel_h * l.kernel_w;
  Tensor y = Tensor::matrix(batch, out.size());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xs = x.data() + n * in.size();
    double* ys = y.data() + n * out.size();
    for (std::size_t oc = 0; oc < out.channels; ++oc) {
      double* yp = ys + oc * out_plane;
      std::fill(yp, yp + out_plane, b[oc]);
      for (std::size_t c = 0; c < in.channels; ++c) {
        const double* xp = xs + c * in_plane;
        const double* wk = w.data() + (oc * in.channels + c) * kk;
        for (std::size_t ky = 0; ky < l.kernel_h; ++ky) {
          for (std::size_t kx = 0; kx < l.kernel_w; ++kx) {
            const double wv = wk[ky * l.kernel_w + kx];
            for (std::size_t oy = 0; oy < out.height; ++oy) {
              const double* xrow =
                  xp + (oy * l.stride + ky) * in.width + kx;
              double* yrow = yp + oy * out.width;
              if (l.stride == 1) {
                for (std::size_t ox = 0; ox < out.width; ++ox) {
                  yrow[ox] += wv * xrow[ox];
                }
              } else {
                for (std::size_t ox = 0; ox < out.width; ++ox) {
                  yrow[ox] += wv * xrow[ox * l.stride];
                }
              }
            }
          }
        }
      }
    }
  }
  return y;
}

void conv_backward(const ConvLayer& l, const Tensor& w, const Tensor& x,
                   const Tensor& dy, Tensor& dw, Tensor& db, Tensor& dx) {
  const ImageShape in = l.input;
  const ImageShape out = l.output();
  const std::size_t batch = x.rows();
  const std::size_t in_plane = in.height * in.width;
  const std::size_t out_plane = out.height * out.width;
  const std::size_t kk = l.kernel_h * l.kernel_w;
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xs = x.data() + n * in.size();
    const double* dys = dy.data() + n * out.size();
    double* dxs = dx.data() + n * in.size();
    for (std::size_t oc = 0; oc < out.channels; ++oc) {
      const double* dyp = dys + oc * out_plane;
      double bsum = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) bsum += dyp[i];
      db[oc] += bsum;
      for (std::size_t c = 0; c < in.channels; ++c) {
        const double* xp = xs + c * in_plane;
        double* dxp = dxs + c * in_plane;
        const std::size_t base = (oc * in.channels + c) * kk;
        for (std::size_t ky = 0; ky < l.kernel_h; ++ky) {
          for (std::size_t kx = 0; kx < l.kernel_w; ++kx) {
            const std::size_t widx = base + ky * l.kernel_w + kx;
            const double wv = w[widx];
            double gsum = 0.0;
            for (std::size_t oy = 0; oy < out.height; ++oy) {
              const std::size_t off = (oy * l.stride + ky) * in.width + kx;
              const double* xrow = xp + off;
              double* dxrow = dxp + off;
              const double* dyrow = dyp + oy * out.width;
              for (std::size_t ox = 0; ox < out.width; ++ox) {
                const std::size_t xi = ox * l.stride;
                gsum += dyrow[ox] * xrow[xi];
                dxrow[xi] += wv * dyrow[ox];
              }
            }
            dw[widx] += gsum;
          }
        }
      }
    }
  }
}

Tensor pool_forward(const MaxPoolLayer& l, const Tensor& x,
                    std::vector<std::uint32_t>& argmax) {
  const ImageShape in = l.input;
  const ImageShape out = l.output();
  const std::size_t batch = x.rows();
  Tensor y = Tensor::matrix(batch, out.size());
  argmax.assign(batch * out.size(), 0);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xs = x.data() + n * in.size();
    for (std::size_t c = 0; c < out.channels; ++c) {
      for (std::size_t oy = 0; oy < out.height; ++oy) {
        for (std::size_t ox = 0; ox < out.width; ++ox) {
          std::size_t best = c * in.height * in.width +
                             oy * l.window_h * in.width + ox * l.window_w;
          for (std::size_t py = 0; py < l.window_h; ++py) {
            for (std::size_t px = 0; px < l.window_w; ++px) {
              const std::size_t idx = c * in.height * in.width +
                                      (oy * l.window_h + py) * in.width +
                                      ox * l.window_w + px;
              if (xs[idx] > xs[best]) best = idx;
            }
          }
          const std::size_t o = (c * out.height + oy) * out.width + ox;
          y[n * out.size() + o] = xs[best];
          argmax[n * out.size() + o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return y;
}

ImageShape require_image(std::size_t width, ImageShape shape) {
  if (shape.size() != width) {
    throw ShapeError(width_mismatch("image layer input", shape.size(), width));
  }
  return shape;
}

std::size_t fit(std::size_t preferred, std::size_t extent) {
  return std::max<std::size_t>(1, std::min(preferred, extent));
}

// Incrementally appends layers while tracking the current image shape.
class SpecBuilder {
 public:
  explicit SpecBuilder(ImageShape input) : shape_(input) {}

  void conv(std::size_t out_channels, std::size_t kernel,
            std::size_t stride = 1) {
    ConvLayer c;
    c.input = shape_;
    c.out_channels = out_channels;
    c.kernel_h = fit(kernel, shape_.height);
    c.kernel_w = fit(kernel, shape_.width);
    c.stride = stride;
    if (stride == 0) throw ShapeError("conv stride must be positive");
    layers_.push_back(c);
    shape_ = c.output();
  }

  void pool() {
    MaxPoolLayer p;
    p.input = shape_;
    p.window_h = fit(2, shape_.height);
    p.window_w = fit(2, shape_.width);
    layers_.push_back(p);
    shape_ = p.output();
  }

  void relu() { layers_.push_back(ReluLayer{shape_.size()}); }

  void dense(std::size_t out) {
    layers_.push_back(DenseLayer{shape_.size(), out});
    shape_ = ImageShape{1, 1, out};
  }

  void mark_split() { split_ = layers_.size(); }

  NetworkSpec finish(Architecture arch, std::size_t embedding_dim,
                     std::size_t num_classes) {
    NetworkSpec spec;
    spec.arch = arch;
    spec.layers = std::move(layers_);
    spec.embedding_dim = embedding_dim;
    spec.split_index = split_;
    spec.num_classes = num_classes;
    spec.validate();
    return spec;
  }

 private:
  ImageShape shape_;
  std::vector<LayerSpec> layers_;
  std::size_t split_ = 0;
};

std::size_t parse_size(std::string_view token, std::string_view full) {
  std::size_t value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
    throw ShapeError("bad number '" + std::string(token) +
                     "' in layer list '" + std::string(full) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::pair<std::size_t, std::size_t> segment_layers(const NetworkSpec& spec,
                                                   Segment segment) {
  switch (segment) {
    case Segment::kEmbedding:
      return {0, spec.split_index};
    case Segment::kDecision:
      return {spec.split_index, spec.layers.size()};
    case Segment::kFull:
      break;
  }
  return {0, spec.layers.size()};
}

}  // namespace

std::size_t layer_input_width(const LayerSpec& layer) {
  return std::visit(
      Overloaded{[](const DenseLayer& l) { return l.in; },
                 [](const ConvLayer& l) { return l.input.size(); },
                 [](const MaxPoolLayer& l) { return l.input.size(); },
                 [](const ReluLayer& l) { return l.width; }},
      layer);
}

std::size_t layer_output_width(const LayerSpec& layer) {
  return std::visit(
      Overloaded{[](const DenseLayer& l) { return l.out; },
                 [](const ConvLayer& l) { return l.output().size(); },
                 [](const MaxPoolLayer& l) { return l.output().size(); },
                 [](const ReluLayer& l) { return l.width; }},
      layer);
}

std::size_t layer_param_tensors(const LayerSpec& layer) {
  return std::holds_alternative<DenseLayer>(layer) ||
                 std::holds_alternative<ConvLayer>(layer)
             ? 2
             : 0;
}

std::string layer_name(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const DenseLayer& l) {
            return "dense(" + std::to_string(l.in) + "->" +
                   std::to_string(l.out) + ")";
          },
          [](const ConvLayer& l) {
            return "conv(" + std::to_string(l.input.channels) + "->" +
                   std::to_string(l.out_channels) + ", " +
                   std::to_string(l.kernel_h) + "x" +
                   std::to_string(l.kernel_w) + ")";
          },
          [](const MaxPoolLayer& l) {
            return "maxpool(" + std::to_string(l.window_h) + "x" +
                   std::to_string(l.window_w) + ")";
          },
          [](const ReluLayer&) { return std::string("relu"); }},
      layer);
}

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::kMlp3:
      return "MLP3";
    case Architecture::kCnn2:
      return "CNN2";
    case Architecture::kLenet:
      return "LENET";
    case Architecture::kCustom:
      break;
  }
  return "custom";
}

Architecture parse_architecture(std::string_view name) {
  std::string upper(name);
  for (char& ch : upper) ch = static_cast<char>(std::toupper(ch));
  if (upper == "MLP3" || upper == "MLP") return Architecture::kMlp3;
  if (upper == "CNN2" || upper == "CNN") return Architecture::kCnn2;
  if (upper == "LENET") return Architecture::kLenet;
  if (upper == "CUSTOM") return Architecture::kCustom;
  throw ShapeError("unknown architecture '" + std::string(name) + "'");
}

std::size_t NetworkSpec::input_width() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  return layer_input_width(layers.front());
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  if (embedding_dim == 0) throw ShapeError("embedding dimension must be > 0");
  if (split_index == 0 || split_index >= layers.size()) {
    throw ShapeError("split index " + std::to_string(split_index) +
                     " must leave both embedding and decision layers");
  }
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const std::size_t prev = layer_output_width(layers[i - 1]);
    const std::size_t cur = layer_input_width(layers[i]);
    if (prev != cur) {
      throw ShapeError(width_mismatch(
          "layer " + std::to_string(i) + " " + layer_name(layers[i]), prev,
          cur));
    }
  }
  for (const auto& layer : layers) {
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      if (c->kernel_h > c->input.height || c->kernel_w > c->input.width ||
          c->stride == 0 || c->out_channels == 0) {
        throw ShapeError("convolution does not fit its input: " +
                         layer_name(layer));
      }
    }
    if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
      if (p->window_h == 0 || p->window_w == 0 ||
          p->window_h > p->input.height || p->window_w > p->input.width) {
        throw ShapeError("pooling does not fit its input");
      }
    }
  }
  const std::size_t emb_out = layer_output_width(layers[split_index - 1]);
  if (emb_out != embedding_dim) {
    throw ShapeError(width_mismatch("embedding output", embedding_dim, emb_out));
  }
  if (layer_input_width(layers[split_index]) != embedding_dim) {
    throw ShapeError(width_mismatch("decision input", embedding_dim,
                                    layer_input_width(layers[split_index])));
  }
  const std::size_t out = layer_output_width(layers.back());
  if (out != num_classes) {
    throw ShapeError(width_mismatch("decision output", num_classes, out));
  }
}

bool NetworkSpec::decision_is_affine() const {
  return layers.size() == split_index + 1 &&
         std::holds_alternative<DenseLayer>(layers.back());
}

NetworkSpec make_network_spec(Architecture arch, ImageShape input,
                              std::size_t embedding_dim,
                              std::size_t num_classes) {
  if (input.size() == 0) throw ShapeError("empty input shape");
  SpecBuilder b(input);
  switch (arch) {
    case Architecture::kMlp3:
      b.dense(128);
      b.relu();
      b.dense(embedding_dim);
      b.relu();
      break;
    case Architecture::kCnn2:
      b.conv(8, 3);
      b.relu();
      b.conv(16, 3);
      b.relu();
      b.dense(embedding_dim);
      b.relu();
      break;
    case Architecture::kLenet:
      b.conv(6, 3);
      b.relu();
      b.conv(16, 3);
      b.relu();
      b.pool();
      b.conv(32, 3);
      b.relu();
      b.dense(120);
      b.relu();
      b.dense(embedding_dim);
      b.relu();
      break;
    case Architecture::kCustom:
      throw ShapeError("custom architectures need a layer list");
  }
  b.mark_split();
  b.dense(num_classes);
  return b.finish(arch, embedding_dim, num_classes);
}

NetworkSpec parse_network_spec(std::string_view layers, ImageShape input,
                               std::size_t embedding_dim,
                               std::size_t num_classes) {
  const auto halves = split(layers, '|');
  if (halves.size() != 2) {
    throw ShapeError("layer list '" + std::string(layers) +
                     "' needs exactly one '|' split marker");
  }
  SpecBuilder b(input);
  for (std::size_t h = 0; h < 2; ++h) {
    if (h == 1) b.mark_split();
    for (std::string_view raw : split(halves[h], ',')) {
      const std::string_view tok = trim(raw);
      const auto parts = split(tok, ':');
      const std::string_view kind = parts[0];
      if (kind == "relu" && parts.size() == 1) {
        b.relu();
      } else if (kind == "pool" && parts.size() == 1) {
        b.pool();
      } else if (kind == "dense" && parts.size() == 2) {
        b.dense(parse_size(parts[1], layers));
      } else if (kind == "conv" && (parts.size() == 3 || parts.size() == 4)) {
        b.conv(parse_size(parts[1], layers), parse_size(parts[2], layers),
               parts.size() == 4 ? parse_size(parts[3], layers) : 1);
      } else {
        throw ShapeError("bad layer token '" + std::string(tok) + "'");
      }
    }
  }
  return b.finish(Architecture::kCustom, embedding_dim, num_classes);
}

std::size_t NetworkState::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  NetworkState state;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const double limit = std::sqrt(6.0 / static_cast<double>(d->in + d->out));
      Tensor w({d->out, d->in});
      for (double& v : w.storage()) v = rng.uniform(-limit, limit);
      state.params.push_back(std::move(w));
      state.params.emplace_back(std::vector<std::size_t>{d->out});
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      const std::size_t kk = c->kernel_h * c->kernel_w;
      const double limit = std::sqrt(
          6.0 / static_cast<double>((c->input.channels + c->out_channels) * kk));
      Tensor w({c->out_channels, c->input.channels, c->kernel_h, c->kernel_w});
      for (double& v : w.storage()) v = rng.uniform(-limit, limit);
      state.params.push_back(std::move(w));
      state.params.emplace_back(std::vector<std::size_t>{c->out_channels});
    }
  }
  return state;
}

ParamRange param_range(const NetworkSpec& spec, Segment segment) {
  const auto [first, last] = segment_layers(spec, segment);
  ParamRange r;
  for (std::size_t i = 0; i < first; ++i) {
    r.begin += layer_param_tensors(spec.layers[i]);
  }
  r.end = r.begin;
  for (std::size_t i = first; i < last; ++i) {
    r.end += layer_param_tensors(spec.layers[i]);
  }
  return r;
}

ForwardResult forward(const NetworkState& state, const NetworkSpec& spec,
                      Segment segment, const Tensor& input) {
  const auto [first, last] = segment_layers(spec, segment);
  if (input.rank() != 2) {
    throw ShapeError("forward input must be [batch x features], got " +
                     shape_string(input.shape()));
  }
  const std::size_t expected = layer_input_width(spec.layers[first]);
  if (input.cols() != expected) {
    throw ShapeError(width_mismatch(
        segment == Segment::kDecision ? "decision input" : "network input",
        expected, input.cols()));
  }
  const ParamRange range = param_range(spec, segment);
  if (state.params.size() < range.end) {
    throw ShapeError("network state has too few parameter tensors");
  }

  ForwardResult result;
  ForwardTrace& trace = result.trace;
  trace.segment = segment;
  trace.batch = input.rows();
  trace.first_layer = first;
  trace.inputs.reserve(last - first);
  trace.pool_argmax.resize(last - first);

  Tensor x = input;
  std::size_t p = range.begin;
  for (std::size_t i = first; i < last; ++i) {
    const LayerSpec& layer = spec.layers[i];
    Tensor y;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      y = dense_forward(*d, state.params[p], state.params[p + 1], x);
      p += 2;
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      require_image(x.cols(), c->input);
      y = conv_forward(*c, state.params[p], state.params[p + 1], x);
      p += 2;
    } else if (const auto* m = std::get_if<MaxPoolLayer>(&layer)) {
      require_image(x.cols(), m->input);
      y = pool_forward(*m, x, trace.pool_argmax[i - first]);
    } else {
      y = x;
      for (double& v : y.storage()) v = v > 0.0 ? v : 0.0;
    }
    trace.inputs.push_back(std::move(x));
    x = std::move(y);
  }
  result.output = std::move(x);
  return result;
}

BackwardResult backward(const NetworkState& state, const NetworkSpec& spec,
                        const ForwardTrace& trace, const Tensor& grad_output) {
  const auto [first, last] = segment_layers(spec, trace.segment);
  if (trace.first_layer != first || trace.inputs.size() != last - first) {
    throw ShapeError("forward trace does not match the requested segment");
  }
  const std::size_t out_width = layer_output_width(spec.layers[last - 1]);
  if (grad_output.rank() != 2 || grad_output.rows() != trace.batch ||
      grad_output.cols() != out_width) {
    throw ShapeError("upstream gradient " + shape_string(grad_output.shape()) +
                     " does not match trace [" + std::to_string(trace.batch) +
                     "x" + std::to_string(out_width) + "]");
  }
  for (std::size_t i = first; i < last; ++i) {
    const Tensor& in = trace.inputs[i - first];
    if (in.rows() != trace.batch ||
        in.cols() != layer_input_width(spec.layers[i])) {
      throw ShapeError("stale forward trace at layer " + std::to_string(i));
    }
  }

  const ParamRange range = param_range(spec, trace.segment);
  BackwardResult result;
  result.param_grads.reserve(range.size());
  for (std::size_t k = range.begin; k < range.end; ++k) {
    result.param_grads.push_back(state.params[k].zeros_like());
  }

  Tensor dy = grad_output;
  std::size_t p = range.end;
  for (std::size_t i = last; i-- > first;) {
    const LayerSpec& layer = spec.layers[i];
    const Tensor& x = trace.inputs[i - first];
    Tensor dx = x.zeros_like();
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      p -= 2;
      dense_backward(*d, state.params[p], x, dy,
                     result.param_grads[p - range.begin],
                     result.param_grads[p + 1 - range.begin], dx);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      p -= 2;
      conv_backward(*c, state.params[p], x, dy,
                    result.param_grads[p - range.begin],
                    result.param_grads[p + 1 - range.begin], dx);
    } else if (const auto* m = std::get_if<MaxPoolLayer>(&layer)) {
      const auto& argmax = trace.pool_argmax[i - first];
      const std::size_t out_size = m->output().size();
      const std::size_t in_size = m->input.size();
      if (argmax.size() != trace.batch * out_size) {
        throw ShapeError("stale pooling trace at layer " + std::to_string(i));
      }
      for (std::size_t n = 0; n < trace.batch; ++n) {
        for (std::size_t o = 0; o < out_size; ++o) {
          dx[n * in_size + argmax[n * out_size + o]] += dy[n * out_size + o];
        }
      }
    } else {
      for (std::size_t k = 0; k < x.size(); ++k) {
        dx[k] = x[k] > 0.0 ? dy[k] : 0.0;
      }
    }
    dy = std::move(dx);
  }
  result.grad_input = std::move(dy);
  return result;
}

BackwardResult backward_decision(const NetworkState& state,
                                 const NetworkSpec& spec,
                                 const ForwardTrace& trace,
                                 const Tensor& grad_logits) {
  if (trace.segment != Segment::kDecision) {
    throw ShapeError("backward_decision needs a decision-network trace");
  }
  return backward(state, spec, trace, grad_logits);
}

std::vector<Tensor> backward_embedding(const NetworkState& state,
                                       const NetworkSpec& spec,
                                       const ForwardTrace& trace,
                                       const Tensor& grad_embedding) {
  if (trace.segment != Segment::kEmbedding) {
    throw ShapeError("backward_embedding needs an embedding-network trace");
  }
  return backward(state, spec, trace, grad_embedding).param_grads;
}

}  // namespace vfmh
