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

#ifndef VFMH_SECAGG_GROUP_HPP_
#define VFMH_SECAGG_GROUP_HPP_

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vfmh::secagg {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);

// Multiplicative group Z_p^* with generator g. Key agreement happens here;
// masking itself runs in the 2^64 ring.
struct GroupParams {
  mpz_class p;
  mpz_class g;
  std::string name;

  // Throws CryptoError for p < 5, or for p < 2^255 unless `allow_small`.
  void validate(bool allow_small) const;
};

// 256-bit safe prime p = 2^255 + 196479 with generator 5 of Z_p^*.
GroupParams default_group();
// RFC 3526 group 14 (2048-bit MODP), generator 2.
GroupParams modp2048_group();
// p = 23, g = 5. Only accepted with the explicit test-mode flag.
GroupParams tiny_test_group();
// "p256", "modp2048" or "test23".
GroupParams group_by_name(std::string_view name);

// True if p is a safe prime and g has order p - 1.
bool generates_full_group(const GroupParams& group);

struct KeyPair {
  mpz_class secret;  // s in [1, p-2]
  mpz_class public_key;  // g^s mod p
};

mpz_class mod_exp(const mpz_class& base, const mpz_class& exp,
                  const mpz_class& mod);

// Draws s uniformly from [1, p-2] using a SHA-256 counter-mode generator
// keyed by `seed`.
KeyPair keygen(const GroupParams& group, std::uint64_t seed);
KeyPair keypair_from_secret(const GroupParams& group, const mpz_class& secret);

// Minimal big-endian magnitude; zero encodes as a single 0x00 byte.
std::vector<std::uint8_t> to_bytes(const mpz_class& value);
mpz_class from_bytes(std::span<const std::uint8_t> bytes);

// Pairwise key CK = SHA-256(pk^sk mod p). Symmetric in the two parties.
struct SharedSecret {
  Digest key{};
  friend bool operator==(const SharedSecret&, const SharedSecret&) = default;
};

// The group element pk^sk mod p before hashing.
mpz_class shared_element(const mpz_class& secret, const mpz_class& peer_public,
                         const GroupParams& group);
SharedSecret derive_shared(const mpz_class& secret,
                           const mpz_class& peer_public,
                           const GroupParams& group);

}  // namespace vfmh::secagg

#endif  // VFMH_SECAGG_GROUP_HPP_
