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

#ifndef VFMH_SECAGG_MASKING_HPP_
#define VFMH_SECAGG_MASKING_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "vfmh/core/tensor.hpp"
#include "vfmh/secagg/group.hpp"

namespace vfmh::secagg {

using RingVector = std::vector<std::uint64_t>;

// Two's-complement fixed point in Z_{2^64} at scale 2^frac_bits.
class FixedPointCodec {
 public:
  explicit FixedPointCodec(int frac_bits = 16);

  int frac_bits() const { return frac_bits_; }
  double scale() const { return scale_; }

  // Largest |x| for which K encoded values can be summed without wrapping:
  // 2^46 / S / K.
  double magnitude_budget(std::size_t parties) const;

  std::uint64_t encode(double x) const;
  double decode(std::uint64_t v) const;

 private:
  int frac_bits_;
  double scale_;
};

// PRF(key, nonce, i): first 8 bytes, little-endian, of
// SHA-256(key || nonce as u64 LE || i as u64 LE).
std::uint64_t prf(const SharedSecret& key, std::uint64_t nonce,
                  std::uint64_t index);

struct BlindingMask {
  RingVector values;
  std::uint64_t nonce = 0;
};

// Mask of passive party k in 1..K:
//   r_k[i] = sum_{j != k} sign(k, j) * PRF(CK_{k,j}, nonce, i)
// with sign = +1 for k < j and -1 for k > j, so that the K masks sum to zero.
// `secrets` must hold CK_{k,j} for every j in 1..K other than k.
BlindingMask blinding_mask(std::size_t k, std::size_t num_passive,
                           const std::map<std::size_t, SharedSecret>& secrets,
                           std::size_t length, std::uint64_t nonce);

struct MaskedEmbedding {
  std::size_t rows = 0;
  std::size_t cols = 0;
  RingVector values;

  friend bool operator==(const MaskedEmbedding&,
                         const MaskedEmbedding&) = default;
};

// [E]_i = encode(E_i) + r_i. Rejects values beyond the codec's magnitude
// budget for `num_passive` summands.
MaskedEmbedding mask_embedding(const Tensor& embedding,
                               const BlindingMask& mask,
                               const FixedPointCodec& codec,
                               std::size_t num_passive);

// E = (E_active + decode(sum_k [E_k])) / C with C = K + 1.
Tensor aggregate(const Tensor& active_embedding,
                 std::span<const MaskedEmbedding> masked,
                 const FixedPointCodec& codec);

}  // namespace vfmh::secagg

#endif  // VFMH_SECAGG_MASKING_HPP_
