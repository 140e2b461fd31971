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

#include "vfmh/secagg/masking.hpp"

#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/sha.h>

#include <cmath>
#include <string>

#include "vfmh/core/errors.hpp"

namespace vfmh::secagg {

FixedPointCodec::FixedPointCodec(int frac_bits)
    : frac_bits_(frac_bits), scale_(std::ldexp(1.0, frac_bits)) {
  if (frac_bits < 0 || frac_bits > 40) {
    throw ConfigError("fixed-point fraction bits must lie in [0, 40]");
  }
}

double FixedPointCodec::magnitude_budget(std::size_t parties) const {
  return std::ldexp(1.0, 46) / scale_ /
         static_cast<double>(parties == 0 ? 1 : parties);
}

std::uint64_t FixedPointCodec::encode(double x) const {
  const auto v = static_cast<std::int64_t>(std::llround(x * scale_));
  return static_cast<std::uint64_t>(v);
}

double FixedPointCodec::decode(std::uint64_t v) const {
  return static_cast<double>(static_cast<std::int64_t>(v)) / scale_;
}

std::uint64_t prf(const SharedSecret& key, std::uint64_t nonce,
                  std::uint64_t index) {
  std::uint8_t msg[48];
  std::copy(key.key.begin(), key.key.end(), msg);
  for (int b = 0; b < 8; ++b) {
    msg[32 + b] = static_cast<std::uint8_t>(nonce >> (8 * b));
    msg[40 + b] = static_cast<std::uint8_t>(index >> (8 * b));
  }
  // The low-level interface avoids the per-call provider lookup of EVP,
  // which dominates for 48-byte inputs.
  SHA256_CTX ctx;
  SHA256_Init(&ctx);
  SHA256_Update(&ctx, msg, sizeof(msg));
  std::uint8_t digest[32];
  SHA256_Final(digest, &ctx);
  std::uint64_t out = 0;
  for (int b = 7; b >= 0; --b) out = (out << 8) | digest[b];
  return out;
}

BlindingMask blinding_mask(std::size_t k, std::size_t num_passive,
                           const std::map<std::size_t, SharedSecret>& secrets,
                           std::size_t length, std::uint64_t nonce) {
  if (k < 1 || k > num_passive) {
    throw ProtocolError("passive index " + std::to_string(k) +
                        " outside 1.." + std::to_string(num_passive));
  }
  BlindingMask mask;
  mask.nonce = nonce;
  mask.values.assign(length, 0);
  for (std::size_t j = 1; j <= num_passive; ++j) {
    if (j == k) continue;
    const auto it = secrets.find(j);
    if (it == secrets.end()) {
      throw ProtocolError("missing shared secret between party " +
                          std::to_string(k) + " and party " +
                          std::to_string(j));
    }
    const bool add = k < j;
    for (std::size_t i = 0; i < length; ++i) {
      const std::uint64_t r = prf(it->second, nonce, i);
      mask.values[i] = add ? mask.values[i] + r : mask.values[i] - r;
    }
  }
  return mask;
}

MaskedEmbedding mask_embedding(const Tensor& embedding,
                               const BlindingMask& mask,
                               const FixedPointCodec& codec,
                               std::size_t num_passive) {
  if (embedding.rank() != 2) {
    throw ShapeError("embedding must be a matrix, got " +
                     shape_string(embedding.shape()));
  }
  if (mask.values.size() != embedding.size()) {
    throw ShapeError("mask length " + std::to_string(mask.values.size()) +
                     " does not match embedding " +
                     shape_string(embedding.shape()));
  }
  const double budget = codec.magnitude_budget(num_passive);
  MaskedEmbedding out;
  out.rows = embedding.rows();
  out.cols = embedding.cols();
  out.values.resize(embedding.size());
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    const double x = embedding[i];
    if (!std::isfinite(x) || std::fabs(x) > budget) {
      throw NumericError("embedding value " + std::to_string(x) +
                         " exceeds the fixed-point budget " +
                         std::to_string(budget));
    }
    out.values[i] = codec.encode(x) + mask.values[i];
  }
  return out;
}

Tensor aggregate(const Tensor& active_embedding,
                 std::span<const MaskedEmbedding> masked,
                 const FixedPointCodec& codec) {
  if (masked.empty()) {
    throw ProtocolError("aggregation needs at least one passive embedding");
  }
  const std::size_t n = active_embedding.size();
  RingVector sum(n, 0);
  for (const auto& m : masked) {
    if (m.values.size() != n || m.rows != active_embedding.rows() ||
        m.cols != active_embedding.cols()) {
      throw ShapeError("masked embedding [" + std::to_string(m.rows) + "x" +
                       std::to_string(m.cols) + "] does not match active " +
                       shape_string(active_embedding.shape()));
    }
    for (std::size_t i = 0; i < n; ++i) sum[i] += m.values[i];
  }
  const double inv_c = 1.0 / static_cast<double>(masked.size() + 1);
  Tensor out = active_embedding;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (out[i] + codec.decode(sum[i])) * inv_c;
  }
  return out;
}

}  // namespace vfmh::secagg
