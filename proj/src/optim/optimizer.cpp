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

#include "vfmh/optim/optimizer.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "vfmh/core/errors.hpp"

namespace vfmh::optim {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kSgd:
      return "sgd";
    case Kind::kMomentum:
      return "momentum";
    case Kind::kAdagrad:
      return "adagrad";
    case Kind::kAdam:
      return "adam";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  if (lower == "sgd") return Kind::kSgd;
  if (lower == "momentum") return Kind::kMomentum;
  if (lower == "adagrad") return Kind::kAdagrad;
  if (lower == "adam") return Kind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  for (double decay : {momentum, beta1, beta2}) {
    if (!(decay >= 0.0 && decay < 1.0)) {
      throw ConfigError("decay rates must lie in [0, 1)");
    }
  }
  if (!(adam_epsilon > 0.0) || !(adagrad_epsilon > 0.0)) {
    throw ConfigError("epsilon must be positive");
  }
}

OptimizerState init_state(const OptimizerConfig& cfg,
                          std::span<const Tensor> params) {
  cfg.validate();
  OptimizerState state;
  if (cfg.kind != Kind::kSgd) {
    for (const auto& p : params) state.first.push_back(p.zeros_like());
  }
  if (cfg.kind == Kind::kAdam) {
    for (const auto& p : params) state.second.push_back(p.zeros_like());
  }
  return state;
}

void step(const OptimizerConfig& cfg, OptimizerState& state,
          std::span<Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer got " + std::to_string(grads.size()) +
                     " gradients for " + std::to_string(params.size()) +
                     " parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].shape() != grads[k].shape()) {
      throw ShapeError("gradient " + std::to_string(k) + " has shape " +
                       shape_string(grads[k].shape()) + ", parameter has " +
                       shape_string(params[k].shape()));
    }
    if (!grads[k].all_finite()) {
      throw NumericError("non-finite value in gradient tensor " +
                         std::to_string(k));
    }
  }
  const bool needs_first = cfg.kind != Kind::kSgd;
  if ((needs_first && state.first.size() != params.size()) ||
      (cfg.kind == Kind::kAdam && state.second.size() != params.size())) {
    throw ShapeError("optimizer state does not match the parameter list");
  }

  state.step += 1;
  const double eta = cfg.learning_rate;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    double* theta = params[k].data();
    const double* g = grads[k].data();
    const std::size_t n = params[k].size();
    switch (cfg.kind) {
      case Kind::kSgd:
        for (std::size_t i = 0; i < n; ++i) theta[i] -= eta * g[i];
        break;
      case Kind::kMomentum: {
        double* v = state.first[k].data();
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = cfg.momentum * v[i] + g[i];
          theta[i] -= eta * v[i];
        }
        break;
      }
      case Kind::kAdagrad: {
        double* acc = state.first[k].data();
        for (std::size_t i = 0; i < n; ++i) {
          acc[i] += g[i] * g[i];
          theta[i] -= eta * g[i] / (std::sqrt(acc[i]) + cfg.adagrad_epsilon);
        }
        break;
      }
      case Kind::kAdam: {
        double* m = state.first[k].data();
        double* v = state.second[k].data();
        for (std::size_t i = 0; i < n; ++i) {
          m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
          v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
          const double m_hat = m[i] / bc1;
          const double v_hat = v[i] / bc2;
          theta[i] -= eta * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
        }
        break;
      }
    }
  }
}

}  // namespace vfmh::optim
