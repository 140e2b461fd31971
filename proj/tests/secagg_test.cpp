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

#include <gtest/gtest.h>

#include <cmath>

#include "support/checks.hpp"
#include "support/keys.hpp"
#include "vfmh/core/errors.hpp"
#include "vfmh/secagg/group.hpp"
#include "vfmh/secagg/masking.hpp"

namespace vfmh::secagg {
namespace {

// Textbook right-to-left square-and-multiply on machine words.
std::uint64_t square_multiply(std::uint64_t base, std::uint64_t exp,
                              std::uint64_t mod) {
  unsigned __int128 result = 1, b = base % mod;
  while (exp > 0) {
    if (exp & 1) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

GroupParams tiny() {
  GroupParams g = tiny_test_group();
  g.validate(true);
  return g;
}

TEST(KeyPair, TinyGroupPublicKeys) {
  const auto g = tiny();
  EXPECT_EQ(keypair_from_secret(g, 6).public_key, 8);
  EXPECT_EQ(keypair_from_secret(g, 15).public_key, 19);
  EXPECT_EQ(square_multiply(5, 6, 23), 8u);
  EXPECT_EQ(square_multiply(5, 15, 23), 19u);
  EXPECT_EQ(keypair_from_secret(g, 1).public_key, g.g);
}

TEST(KeyPair, ModExpMatchesSquareMultiply) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t mod = (rng.next_u64() >> 2) | 3;
    const std::uint64_t base = rng.below(mod);
    const std::uint64_t exp = rng.next_u64();
    const mpz_class r = mod_exp(mpz_class(std::to_string(base)),
                                mpz_class(std::to_string(exp)),
                                mpz_class(std::to_string(mod)));
    EXPECT_EQ(r.get_str(), std::to_string(square_multiply(base, exp, mod)));
  }
}

TEST(KeyPair, KeygenIsDeterministicAndInRange) {
  const auto g = default_group();
  const auto a = keygen(g, 42);
  EXPECT_EQ(a.secret, keygen(g, 42).secret);
  EXPECT_NE(a.secret, keygen(g, 43).secret);
  EXPECT_GE(a.secret, 1);
  EXPECT_LE(a.secret, g.p - 2);
  EXPECT_EQ(a.public_key, mod_exp(g.g, a.secret, g.p));
}

TEST(SharedSecret, TinyGroupBothSidesHashElementTwo) {
  const auto g = tiny();
  EXPECT_EQ(shared_element(6, 19, g), 2);
  EXPECT_EQ(shared_element(15, 8, g), 2);
  EXPECT_EQ(square_multiply(19, 6, 23), 2u);
  const auto ab = derive_shared(6, 19, g);
  EXPECT_EQ(ab, derive_shared(15, 8, g));
  // SHA-256 of the single byte 0x02.
  const Digest expected = {0xdb, 0xc1, 0xb4, 0xc9, 0x00, 0xff, 0xe4, 0x8d,
                           0x57, 0x5b, 0x5d, 0xa5, 0xc6, 0x38, 0x04, 0x01,
                           0x25, 0xf6, 0x5d, 0xb0, 0xfe, 0x3e, 0x24, 0x49,
                           0x4b, 0x76, 0xea, 0x98, 0x64, 0x57, 0xd9, 0x86};
  EXPECT_EQ(ab.key, expected);
}

TEST(SharedSecret, UnitSecretYieldsPeerKey) {
  const auto g = default_group();
  const auto peer = keygen(g, 5).public_key;
  EXPECT_EQ(shared_element(1, peer, g), peer);
}

TEST(SharedSecret, SymmetricForRandomPairs) {
  for (const auto& g : {tiny(), default_group()}) {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto a = keygen(g, 2 * s + 1);
      const auto b = keygen(g, 2 * s + 2);
      EXPECT_EQ(derive_shared(a.secret, b.public_key, g),
                derive_shared(b.secret, a.public_key, g));
    }
  }
}

TEST(SharedSecret, RejectsDegeneratePeerKeys) {
  const auto g = default_group();
  EXPECT_THROW(derive_shared(5, 1, g), CryptoError);
  EXPECT_THROW(derive_shared(5, 0, g), CryptoError);
  EXPECT_THROW(derive_shared(5, g.p, g), CryptoError);
}

TEST(Group, SmallGroupsNeedTestMode) {
  EXPECT_THROW(tiny_test_group().validate(false), CryptoError);
  EXPECT_NO_THROW(tiny_test_group().validate(true));
  EXPECT_NO_THROW(default_group().validate(false));
  EXPECT_THROW(group_by_name("p13"), ConfigError);
  EXPECT_EQ(group_by_name("modp2048").p, modp2048_group().p);
}

TEST(Group, StockGeneratorsSpanTheGroup) {
  EXPECT_TRUE(generates_full_group(tiny()));
  EXPECT_TRUE(generates_full_group(default_group()));
  GroupParams bad = tiny();
  bad.g = 2;  // 2 has order 11 modulo 23
  EXPECT_FALSE(generates_full_group(bad));
}

TEST(Bytes, MinimalBigEndianRoundTrip) {
  EXPECT_EQ(to_bytes(0), std::vector<std::uint8_t>{0});
  EXPECT_EQ(to_bytes(0x0102), (std::vector<std::uint8_t>{1, 2}));
  const mpz_class big = default_group().p - 7;
  EXPECT_EQ(from_bytes(to_bytes(big)), big);
}

TEST(Prf, MatchesReferenceDigests) {
  const auto ck = derive_shared(6, 19, tiny());
  // First eight bytes, little-endian, of SHA-256(key || nonce || index).
  EXPECT_EQ(prf(ck, 0, 0), 16236941814587012251ull);
  EXPECT_EQ(prf(ck, 3, 7), 8638404987183790656ull);
  EXPECT_EQ(prf(ck, (1ull << 32) | 5, 1000), 15941620349251482462ull);
}

TEST(BlindingMask, TwoPartiesAreNegations) {
  const auto secrets = testing::pairwise_secrets(default_group(), 2, 1);
  const auto r1 = blinding_mask(1, 2, secrets[0], 16, 9);
  const auto r2 = blinding_mask(2, 2, secrets[1], 16, 9);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(r1.values[i], prf(secrets[0].at(2), 9, i));
    EXPECT_EQ(r1.values[i] + r2.values[i], 0u);
  }
}

TEST(BlindingMask, SinglePartyIsZero) {
  const auto mask = blinding_mask(1, 1, {}, 8, 3);
  EXPECT_EQ(mask.values, RingVector(8, 0));
}

TEST(BlindingMask, MissingPeerSecretThrows) {
  auto secrets = testing::pairwise_secrets(default_group(), 3, 1);
  secrets[0].erase(3);
  EXPECT_THROW(blinding_mask(1, 3, secrets[0], 4, 0), ProtocolError);
}

TEST(BlindingMask, FivePartiesCancelOverNonces) {
  const auto secrets = testing::pairwise_secrets(default_group(), 5, 7);
  for (std::uint64_t nonce = 0; nonce < 20; ++nonce) {
    EXPECT_TRUE(testing::masks_cancel(secrets, 257, nonce));
  }
}

TEST(BlindingMask, FreshNonceChangesEveryElement) {
  const auto secrets = testing::pairwise_secrets(default_group(), 3, 2);
  const auto a = blinding_mask(2, 3, secrets[1], 64, 1);
  const auto b = blinding_mask(2, 3, secrets[1], 64, 2);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NE(a.values[i], b.values[i]);
}

TEST(FixedPoint, EncodeDecodeAndBudget) {
  const FixedPointCodec codec(16);
  EXPECT_EQ(codec.encode(1.0), 65536u);
  EXPECT_EQ(codec.encode(-1.0), static_cast<std::uint64_t>(-65536));
  EXPECT_DOUBLE_EQ(codec.decode(codec.encode(-2.5)), -2.5);
  EXPECT_NEAR(codec.decode(codec.encode(0.1)), 0.1, 0.5 / 65536);
  EXPECT_DOUBLE_EQ(codec.magnitude_budget(4), std::ldexp(1.0, 30) / 4);
}

TEST(MaskEmbedding, ZeroMaskGivesEncoding) {
  const FixedPointCodec codec;
  const Tensor e({1, 3}, {0.5, -1.25, 3.0});
  const auto m = mask_embedding(e, BlindingMask{RingVector(3, 0), 0}, codec, 2);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m.values[i], codec.encode(e[i]));
}

TEST(MaskEmbedding, ZeroEmbeddingGivesMask) {
  const FixedPointCodec codec;
  const BlindingMask mask{{11, 22, 0xffffffffffffffffull}, 0};
  const auto m = mask_embedding(Tensor({1, 3}), mask, codec, 2);
  EXPECT_EQ(m.values, mask.values);
}

TEST(MaskEmbedding, RejectsValuesBeyondBudget) {
  const FixedPointCodec codec;
  const double budget = codec.magnitude_budget(3);
  const Tensor e({1, 2}, {0.0, budget * 1.01});
  EXPECT_THROW(mask_embedding(e, BlindingMask{RingVector(2, 0), 0}, codec, 3),
               NumericError);
}

TEST(Aggregate, HandExample) {
  const FixedPointCodec codec;
  const Tensor active({1, 1}, {2.0});
  std::vector<MaskedEmbedding> masked = {
      mask_embedding(Tensor({1, 1}, {1.0}), BlindingMask{{0}, 0}, codec, 2),
      mask_embedding(Tensor({1, 1}, {3.0}), BlindingMask{{0}, 0}, codec, 2)};
  EXPECT_NEAR(aggregate(active, masked, codec)[0], 2.0, 2.0 / (2 * 65536 * 3));
}

TEST(Aggregate, IdenticalEmbeddingsAverageToThemselves) {
  const FixedPointCodec codec;
  const auto secrets = testing::pairwise_secrets(default_group(), 3, 9);
  const Tensor v({2, 2}, {0.25, -1.5, 3.0, 0.0});
  std::vector<MaskedEmbedding> masked;
  for (std::size_t k = 1; k <= 3; ++k) {
    masked.push_back(mask_embedding(
        v, blinding_mask(k, 3, secrets[k - 1], 4, 1), codec, 3));
  }
  const Tensor agg = aggregate(v, masked, codec);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(agg[i], v[i], 3.0 / (2 * 65536 * 4));
}

TEST(Aggregate, MatchesPlainAverageWithinQuantization) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t k = 2 + seed % 5;
    const double tol = static_cast<double>(k) / (2 * 65536.0 * (k + 1));
    EXPECT_LE(testing::aggregate_error(k, 8, 64, seed, true), tol);
    EXPECT_LE(testing::aggregate_error(k, 8, 64, seed, false), tol);
  }
}

TEST(Aggregate, RejectsMismatchedShapes) {
  const FixedPointCodec codec;
  const Tensor active({1, 2});
  std::vector<MaskedEmbedding> masked = {MaskedEmbedding{1, 3, RingVector(3, 0)}};
  EXPECT_THROW(aggregate(active, masked, codec), ShapeError);
  EXPECT_THROW(aggregate(active, {}, codec), Error);
}

}  // namespace
}  // namespace vfmh::secagg
