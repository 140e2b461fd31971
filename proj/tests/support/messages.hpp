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

#ifndef VFMH_TESTS_SUPPORT_MESSAGES_HPP_
#define VFMH_TESTS_SUPPORT_MESSAGES_HPP_

#include <bit>
#include <cstdint>
#include <limits>

#include "vfmh/core/random.hpp"
#include "vfmh/transport/message.hpp"

namespace vfmh::testing {

// Finite doubles drawn from raw bit patterns, so denormals, signed zeros
// and extreme exponents all occur.
inline double random_double(Rng& rng) {
  while (true) {
    const double d = std::bit_cast<double>(rng.next_u64());
    if (std::isfinite(d)) return d;
  }
}

inline Tensor random_wire_tensor(Rng& rng) {
  const std::size_t rows = rng.below(6);
  const std::size_t cols = 1 + rng.below(9);
  Tensor t({rows, cols});
  for (double& v : t.storage()) v = random_double(rng);
  return t;
}

inline transport::RoundNonce random_nonce(Rng& rng) {
  return {static_cast<std::uint32_t>(rng.next_u64()),
          static_cast<std::uint32_t>(rng.next_u64())};
}

// A random message of the given type; `sender` is left to the caller.
inline transport::Message random_message(Rng& rng, transport::MsgType type) {
  using namespace transport;
  Message m;
  switch (type) {
    case MsgType::kPublicKey: {
      PublicKeyMsg pk;
      pk.subject = static_cast<PartyIndex>(rng.below(9));
      pk.element.resize(1 + rng.below(64));
      for (auto& b : pk.element) b = static_cast<std::uint8_t>(rng.next_u64());
      m.payload = pk;
      break;
    }
    case MsgType::kMaskedEmbedding: {
      MaskedEmbeddingMsg me;
      me.nonce = random_nonce(rng);
      me.embedding.rows = rng.below(5);
      me.embedding.cols = 1 + rng.below(7);
      me.embedding.values.resize(me.embedding.rows * me.embedding.cols);
      for (auto& v : me.embedding.values) v = rng.next_u64();
      m.payload = me;
      break;
    }
    case MsgType::kGlobalEmbedding:
      m.payload = GlobalEmbeddingMsg{random_nonce(rng), random_wire_tensor(rng)};
      break;
    case MsgType::kPrediction:
      m.payload = PredictionMsg{random_nonce(rng), random_wire_tensor(rng)};
      break;
    case MsgType::kLossAndGrad: {
      LossAndGradMsg lg;
      lg.nonce = random_nonce(rng);
      lg.party = static_cast<PartyIndex>(rng.below(9));
      lg.loss = random_double(rng);
      lg.grad_logits = random_wire_tensor(rng);
      m.payload = lg;
      break;
    }
  }
  return m;
}

inline transport::Message random_message(Rng& rng) {
  return random_message(rng,
                        static_cast<transport::MsgType>(1 + rng.below(5)));
}

}  // namespace vfmh::testing

#endif  // VFMH_TESTS_SUPPORT_MESSAGES_HPP_
