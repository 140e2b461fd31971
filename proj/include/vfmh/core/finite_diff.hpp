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

#ifndef VFMH_CORE_FINITE_DIFF_HPP_
#define VFMH_CORE_FINITE_DIFF_HPP_

#include <functional>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/core/tensor.hpp"

namespace vfmh {

using LossFn = std::function<double(const NetworkState&)>;

// Central differences (f(θ+h) - f(θ-h)) / 2h for every scalar parameter.
// `state` is perturbed in place and restored before returning.
std::vector<Tensor> finite_diff_gradient(NetworkState& state,
                                         const LossFn& loss_fn, double h);

// Same, restricted to params[range.begin, range.end).
std::vector<Tensor> finite_diff_gradient(NetworkState& state, ParamRange range,
                                         const LossFn& loss_fn, double h);

}  // namespace vfmh

#endif  // VFMH_CORE_FINITE_DIFF_HPP_
