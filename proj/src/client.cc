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

#include "pmfl/client.h"

#include <numeric>

#include <spdlog/spdlog.h>

#include "pmfl/common.h"
#include "pmfl/random.h"

namespace pmfl {

std::optional<std::vector<double>> local_train(NodeState& node,
                                               const ModelParams& global_params,
                                               const LocalTrainConfig& cfg,
                                               std::int64_t round) {
  if (node.shard.empty()) {
    spdlog::error("node {} has an empty shard; skipping round {}", node.id, round);
    return std::nullopt;
  }
  if (cfg.local_iterations < 0) throw ValidationError("local iterations must be >= 0");
  if (cfg.batch_size == 0) throw ValidationError("batch size must be >= 1");

  // The mu reference is fixed at the start of the round.
  std::optional<ModelParams> reference;
  if (!node.buffer.empty()) reference = node.buffer.newest();
  const MuRule mu_rule = MuRule::from_reference(reference ? &*reference : nullptr);
  const ContrastiveSettings settings{cfg.tau, cfg.lambda};

  Rng rng = make_rng(node.seed, streams::kTraining, node.id,
                     static_cast<std::uint64_t>(round));
  const std::size_t n = node.shard.size();
  const std::size_t b = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span<std::size_t>(order), rng);
  std::size_t cursor = 0;

  ModelParams w = global_params;
  for (int e = 0; e < cfg.local_iterations; ++e) {
    if (cursor + b > n) {
      shuffle(std::span<std::size_t>(order), rng);
      cursor = 0;
    }
    const Minibatch batch =
        node.shard.subset(std::span<const std::size_t>(order).subspan(cursor, b));
    cursor += b;
    const Gradient grad =
        combined_loss_and_grad(w, batch, global_params, node.buffer, settings, mu_rule);
    ModelParams next = sgd_step(w, grad, cfg.eta_l);
    node.buffer.push(std::move(w));
    w = std::move(next);
  }
  node.last_round = round;
  ++node.rounds_trained;
  return param_delta(w, global_params);
}

std::vector<double> nonparticipant_update(const ModelShape& shape) {
  return std::vector<double>(shape.num_params(), 0.0);
}

}  // namespace pmfl
