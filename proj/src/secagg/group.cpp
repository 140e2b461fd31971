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

#include "vfmh/secagg/group.hpp"

#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/sha.h>

#include "vfmh/core/errors.hpp"

namespace vfmh::secagg {
namespace {

constexpr std::string_view kModp2048Hex =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF";

void put_u64_le(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out;
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

void GroupParams::validate(bool allow_small) const {
  if (p < 5) throw CryptoError("degenerate group: p must be at least 5");
  if (g < 2 || g >= p) throw CryptoError("generator out of range");
  if (!allow_small && mpz_sizeinbase(p.get_mpz_t(), 2) < 256) {
    throw CryptoError("group '" + name +
                      "' is below 2^255; enable test mode to use it");
  }
}

GroupParams default_group() {
  mpz_class p = 1;
  p <<= 255;
  p += 196479;
  return {p, 5, "p256"};
}

GroupParams modp2048_group() {
  return {mpz_class(std::string(kModp2048Hex), 16), 2, "modp2048"};
}

GroupParams tiny_test_group() { return {23, 5, "test23"}; }

GroupParams group_by_name(std::string_view name) {
  if (name == "p256") return default_group();
  if (name == "modp2048") return modp2048_group();
  if (name == "test23") return tiny_test_group();
  throw ConfigError("unknown group '" + std::string(name) + "'");
}

bool generates_full_group(const GroupParams& group) {
  if (mpz_probab_prime_p(group.p.get_mpz_t(), 40) == 0) return false;
  const mpz_class q = (group.p - 1) / 2;
  if (mpz_probab_prime_p(q.get_mpz_t(), 40) == 0) return false;
  // Order of g divides 2q; it is 2q unless g^2 == 1 or g^q == 1.
  return mod_exp(group.g, 2, group.p) != 1 &&
         mod_exp(group.g, q, group.p) != 1;
}

mpz_class mod_exp(const mpz_class& base, const mpz_class& exp,
                  const mpz_class& mod) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

KeyPair keypair_from_secret(const GroupParams& group, const mpz_class& secret) {
  if (group.p < 5) throw CryptoError("degenerate group: p must be at least 5");
  if (secret < 1 || secret > group.p - 2) {
    throw CryptoError("secret key outside [1, p-2]");
  }
  return {secret, mod_exp(group.g, secret, group.p)};
}

KeyPair keygen(const GroupParams& group, std::uint64_t seed) {
  if (group.p < 5) throw CryptoError("degenerate group: p must be at least 5");
  // Rejection-sample s - 1 from [0, p-3] using just enough random bits.
  const mpz_class range = group.p - 2;
  const std::size_t bits = mpz_sizeinbase(range.get_mpz_t(), 2);
  const std::size_t bytes = (bits + 7) / 8;
  std::array<std::uint8_t, 24> block{};
  std::copy_n("vfmh-key", 8, block.begin());
  put_u64_le(block.data() + 8, seed);
  for (std::uint64_t counter = 0;; ++counter) {
    std::vector<std::uint8_t> stream;
    for (std::uint64_t j = 0; stream.size() < bytes; ++j) {
      put_u64_le(block.data() + 16, (counter << 16) | j);
      const Digest d = sha256(block);
      stream.insert(stream.end(), d.begin(), d.end());
    }
    stream.resize(bytes);
    mpz_class candidate = from_bytes(stream);
    candidate >>= bytes * 8 - bits;
    if (candidate < range) return keypair_from_secret(group, candidate + 1);
  }
}

std::vector<std::uint8_t> to_bytes(const mpz_class& value) {
  if (value < 0) throw CryptoError("cannot encode a negative group element");
  if (value == 0) return {0};
  std::vector<std::uint8_t> out((mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, value.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class from_bytes(std::span<const std::uint8_t> bytes) {
  mpz_class v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return v;
}

mpz_class shared_element(const mpz_class& secret, const mpz_class& peer_public,
                         const GroupParams& group) {
  if (peer_public < 2 || peer_public > group.p - 1) {
    throw CryptoError("peer public key outside [2, p-1]");
  }
  return mod_exp(peer_public, secret, group.p);
}

SharedSecret derive_shared(const mpz_class& secret,
                           const mpz_class& peer_public,
                           const GroupParams& group) {
  return {sha256(to_bytes(shared_element(secret, peer_public, group)))};
}

}  // namespace vfmh::secagg
