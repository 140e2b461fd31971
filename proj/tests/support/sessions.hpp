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

#ifndef VFMH_TESTS_SUPPORT_SESSIONS_HPP_
#define VFMH_TESTS_SUPPORT_SESSIONS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vfmh/core/network.hpp"
#include "vfmh/core/random.hpp"
#include "vfmh/data/dataset.hpp"
#include "vfmh/optim/optimizer.hpp"
#include "vfmh/protocol/session.hpp"

namespace vfmh::testing {

struct SmallSession {
  protocol::SessionConfig config;
  std::vector<protocol::PartyData> data;
};

struct SmallSessionSpec {
  std::size_t num_passive = 3;
  std::size_t rows = 400;
  std::size_t test_rows = 100;
  std::size_t features = 32;
  std::size_t classes = 4;
  double spread = 0.5;
  std::size_t epochs = 2;
  std::size_t batch_size = 64;
  std::size_t embedding_dim = 8;
  std::uint64_t seed = 1;
  // Cycled over the parties.
  std::vector<Architecture> archs{Architecture::kMlp3};
  std::vector<optim::Kind> optimizers{optim::Kind::kSgd};
  double learning_rate = 0.05;
};

inline SmallSession small_session(const SmallSessionSpec& s) {
  data::BlobParams bp;
  bp.n = s.rows + s.test_rows;
  bp.classes = s.classes;
  bp.features = s.features;
  bp.spread = s.spread;
  bp.seed = s.seed;
  const auto [train, test] = data::split_tail(data::synth_blobs(bp), s.test_rows);
  SmallSession out;
  const std::size_t c = s.num_passive + 1;
  out.data = protocol::partition(train, test, c);
  auto& cfg = out.config;
  cfg.num_passive = s.num_passive;
  cfg.epochs = s.epochs;
  cfg.batch_size = s.batch_size;
  cfg.seed = s.seed;
  for (std::size_t k = 0; k < c; ++k) {
    protocol::PartyConfig pc;
    pc.spec = make_network_spec(s.archs[k % s.archs.size()], out.data[k].image,
                                s.embedding_dim, s.classes);
    pc.optimizer.kind = s.optimizers[k % s.optimizers.size()];
    pc.optimizer.learning_rate = pc.optimizer.kind == optim::Kind::kAdam
                                     ? s.learning_rate / 10
                                     : s.learning_rate;
    pc.init_seed = mix_seed(s.seed, k);
    cfg.parties.push_back(pc);
  }
  return out;
}

}  // namespace vfmh::testing

#endif  // VFMH_TESTS_SUPPORT_SESSIONS_HPP_
