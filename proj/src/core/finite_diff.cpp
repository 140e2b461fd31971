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

#include "vfmh/core/finite_diff.hpp"

#include "vfmh/core/errors.hpp"

namespace vfmh {

std::vector<Tensor> finite_diff_gradient(NetworkState& state,
                                         const LossFn& loss_fn, double h) {
  return finite_diff_gradient(state, ParamRange{0, state.params.size()},
                              loss_fn, h);
}

std::vector<Tensor> finite_diff_gradient(NetworkState& state, ParamRange range,
                                         const LossFn& loss_fn, double h) {
  if (!(h > 0.0)) throw NumericError("finite-difference step must be > 0");
  std::vector<Tensor> grads;
  grads.reserve(range.size());
  for (std::size_t p = range.begin; p < range.end; ++p) {
    Tensor g = state.params[p].zeros_like();
    for (std::size_t i = 0; i < g.size(); ++i) {
      double& theta = state.params[p][i];
      const double saved = theta;
      theta = saved + h;
      const double up = loss_fn(state);
      theta = saved - h;
      const double down = loss_fn(state);
      theta = saved;
      g[i] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace vfmh
