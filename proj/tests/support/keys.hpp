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

#ifndef VFMH_TESTS_SUPPORT_KEYS_HPP_
#define VFMH_TESTS_SUPPORT_KEYS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "support/checks.hpp"
#include "vfmh/core/random.hpp"
#include "vfmh/secagg/group.hpp"
#include "vfmh/secagg/masking.hpp"

namespace vfmh::testing {

// Pairwise secrets of K passive parties: secrets[k-1][j] = CK_{k,j}.
inline std::vector<std::map<std::size_t, secagg::SharedSecret>> pairwise_secrets(
    const secagg::GroupParams& group, std::size_t num_passive,
    std::uint64_t seed) {
  std::vector<secagg::KeyPair> keys;
  for (std::size_t k = 1; k <= num_passive; ++k) {
    keys.push_back(secagg::keygen(group, mix_seed(seed, k)));
  }
  std::vector<std::map<std::size_t, secagg::SharedSecret>> out(num_passive);
  for (std::size_t k = 1; k <= num_passive; ++k) {
    for (std::size_t j = 1; j <= num_passive; ++j) {
      if (j == k) continue;
      out[k - 1][j] = secagg::derive_shared(keys[k - 1].secret,
                                            keys[j - 1].public_key, group);
    }
  }
  return out;
}

// Elementwise ring sum of every party's mask; all zeros when masks cancel.
inline bool masks_cancel(
    const std::vector<std::map<std::size_t, secagg::SharedSecret>>& secrets,
    std::size_t length, std::uint64_t nonce) {
  const std::size_t k_total = secrets.size();
  secagg::RingVector sum(length, 0);
  for (std::size_t k = 1; k <= k_total; ++k) {
    const auto mask =
        secagg::blinding_mask(k, k_total, secrets[k - 1], length, nonce);
    for (std::size_t i = 0; i < length; ++i) sum[i] += mask.values[i];
  }
  for (std::uint64_t v : sum) {
    if (v != 0) return false;
  }
  return true;
}

// Masked aggregate of random embeddings against the plain average.
inline double aggregate_error(std::size_t k_total, std::size_t rows, std::size_t cols,
                              std::uint64_t seed, bool masked_run) {
  Rng rng(seed);
  const secagg::FixedPointCodec codec;
  const auto secrets = pairwise_secrets(secagg::default_group(), k_total, seed);
  const Tensor active = random_tensor({rows, cols}, rng);
  Tensor plain = active;
  std::vector<secagg::MaskedEmbedding> masked;
  for (std::size_t k = 1; k <= k_total; ++k) {
    const Tensor e = random_tensor({rows, cols}, rng);
    for (std::size_t i = 0; i < e.size(); ++i) plain[i] += e[i];
    const auto mask = masked_run
                          ? secagg::blinding_mask(k, k_total, secrets[k - 1], e.size(), seed)
                          : secagg::BlindingMask{secagg::RingVector(e.size(), 0), seed};
    masked.push_back(secagg::mask_embedding(e, mask, codec, k_total));
  }
  const Tensor agg = secagg::aggregate(active, masked, codec);
  double worst = 0;
  for (std::size_t i = 0; i < agg.size(); ++i) {
    worst = std::max(worst,
                     std::abs(agg[i] - plain[i] / static_cast<double>(k_total + 1)));
  }
  return worst;
}

}  // namespace vfmh::testing

#endif  // VFMH_TESTS_SUPPORT_KEYS_HPP_
