/*
 * Copyright 2026 The PMFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PMFL_CLIENT_H_
#define PMFL_CLIENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pmfl/contrastive.h"
#include "pmfl/dataset.h"
#include "pmfl/nn.h"

namespace pmfl {

struct LocalTrainConfig {
  int local_iterations = 5;  // E
  double eta_l = 0.1;
  std::size_t batch_size = 32;
  double tau = 0.5;
  double lambda = 0.5;
};

// Everything one simulated node owns. The shard never changes after
// construction; the buffer persists across the node's participating rounds.
struct NodeState {
  NodeState(std::size_t id, Dataset shard, std::size_t buffer_capacity,
            std::uint64_t seed)
      : id(id), shard(std::move(shard)), buffer(buffer_capacity), seed(seed) {}

  std::size_t id;
  Dataset shard;
  LocalBuffer buffer;
  std::uint64_t seed;
  std::int64_t last_round = -1;  // last round this node trained in
  std::size_t rounds_trained = 0;
};

// Runs E minibatch SGD steps on the combined loss starting from
// `global_params` and returns the flat update (final - initial). Minibatches
// follow a shuffled without-replacement order seeded by (node seed, node id,
// round). A snapshot of the model used at each iteration is pushed into the
// node's buffer after that iteration. Returns nullopt (and logs an error)
// when the shard is empty.
std::optional<std::vector<double>> local_train(NodeState& node,
                                               const ModelParams& global_params,
                                               const LocalTrainConfig& cfg,
                                               std::int64_t round);

// The zero update sent by a node that sits the round out.
std::vector<double> nonparticipant_update(const ModelShape& shape);

}  // namespace pmfl

#endif  // PMFL_CLIENT_H_
