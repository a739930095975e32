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

#include "pmfl/server.h"

#include <string>

#include "pmfl/common.h"

namespace pmfl {
namespace {

void check_update(const AggregatorState& state, std::size_t node,
                  const std::vector<double>& delta) {
  if (node >= state.num_nodes()) {
    throw ValidationError("update from unknown node " + std::to_string(node));
  }
  if (delta.size() != state.global.size()) {
    throw ShapeError("update from node " + std::to_string(node) + " has " +
                     std::to_string(delta.size()) + " entries, model has " +
                     std::to_string(state.global.size()));
  }
}

// Moves W^t into the history and installs the new global model.
const ModelParams& commit(AggregatorState& state, ModelParams next) {
  const std::size_t keep = state.config.history > 1 ? state.config.history - 1 : 0;
  if (keep > 0) {
    state.history.push_back(std::move(state.global));
    while (state.history.size() > keep) state.history.pop_front();
  }
  state.global = std::move(next);
  ++state.round;
  return state.global;
}

ModelParams weighted_candidate(const AggregatorState& state, const UpdateMap& updates) {
  const std::size_t dim = state.global.size();
  std::vector<double> acc(dim, 0.0);
  for (const auto& [node, delta] : updates) {
    check_update(state, node, delta);
    const double x = state.config.adaptive_weights ? state.nodes[node].weight : 1.0;
    for (std::size_t i = 0; i < dim; ++i) acc[i] += x * delta[i];
  }
  std::vector<double> next = state.global.flatten();
  if (state.config.mode == AggregationMode::kCorrected) {
    const double scale = state.config.eta_g / static_cast<double>(state.num_nodes());
    for (std::size_t i = 0; i < dim; ++i) next[i] += scale * acc[i];
  } else {
    const double scale = state.config.eta_g;
    for (std::size_t i = 0; i < dim; ++i) next[i] -= scale * acc[i];
  }
  return ModelParams::from_flat(state.global.shape(), std::move(next));
}

const ModelParams& smooth_and_commit(AggregatorState& state, ModelParams candidate,
                                     bool smoothing) {
  if (!smoothing || state.config.history <= 1) {
    state.last_psi = 0.0;
    return commit(state, std::move(candidate));
  }
  const double psi = psi_schedule(state.round, state.config.horizon);
  state.last_psi = psi;
  // Warm-up: with no previous global model the candidate passes through.
  if (state.history.empty()) return commit(state, std::move(candidate));
  const std::size_t dim = candidate.size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& past : state.history) {
    const auto p = past.flat();
    for (std::size_t i = 0; i < dim; ++i) mean[i] += p[i];
  }
  const double inv = 1.0 / static_cast<double>(state.history.size());
  std::vector<double> next = candidate.flatten();
  for (std::size_t i = 0; i < dim; ++i) {
    next[i] = (1.0 - psi) * next[i] + psi * (mean[i] * inv);
  }
  return commit(state, ModelParams::from_flat(candidate.shape(), std::move(next)));
}

}  // namespace

AggregationMode parse_aggregation_mode(std::string_view name) {
  if (name == "corrected") return AggregationMode::kCorrected;
  if (name == "paper_literal") return AggregationMode::kPaperLiteral;
  throw ValidationError("unknown aggregation mode '" + std::string(name) + "'");
}

std::string_view aggregation_mode_name(AggregationMode mode) {
  return mode == AggregationMode::kCorrected ? "corrected" : "paper_literal";
}

BaselineKind parse_baseline(std::string_view name) {
  if (name == "uniform_average") return BaselineKind::kUniformAverage;
  if (name == "cached_update") return BaselineKind::kCachedUpdate;
  if (name == "awc_only") return BaselineKind::kAwcOnly;
  throw ValidationError("unknown baseline '" + std::string(name) + "'");
}

AggregatorState::AggregatorState(ModelParams initial, std::size_t num_nodes,
                                 AggregatorConfig cfg)
    : config(cfg), global(std::move(initial)), nodes(num_nodes), cache(num_nodes) {
  if (num_nodes == 0) throw ConfigError("num_nodes", "need at least one node");
  if (config.cutoff < 0) throw ConfigError("cutoff", "must be >= 1 or infinite");
  if (config.history > 1 && config.horizon < 2) {
    throw ConfigError("rounds", "historical smoothing needs at least 2 rounds");
  }
}

std::vector<double> AggregatorState::weights() const {
  std::vector<double> x;
  x.reserve(nodes.size());
  for (const auto& n : nodes) x.push_back(n.weight);
  return x;
}

double psi_schedule(std::int64_t t, std::int64_t horizon) {
  if (horizon < 2) throw ConfigError("rounds", "psi is undefined for T < 2");
  return 0.5 - static_cast<double>(t) / (2.0 * static_cast<double>(horizon - 1));
}

std::vector<double> update_weights(AggregatorState& state,
                                   std::span<const std::uint8_t> indicators) {
  if (indicators.size() != state.num_nodes()) {
    throw ShapeError("indicator vector covers " + std::to_string(indicators.size()) +
                     " nodes, aggregator has " + std::to_string(state.num_nodes()));
  }
  const std::int64_t cutoff = state.config.cutoff;
  for (std::size_t k = 0; k < state.num_nodes(); ++k) {
    NodeWeight& n = state.nodes[k];
    n.interval += 1;
    if (indicators[k] != 0 || (cutoff != kNoCutoff && n.interval == cutoff)) {
      const auto recorded = static_cast<double>(n.interval);
      if (n.events == 0) {
        n.weight = recorded;
      } else {
        const auto r = static_cast<double>(n.events);
        n.weight = (r * n.weight + recorded) / (r + 1.0);
      }
      n.events += 1;
      n.interval = 0;
    }
  }
  return state.weights();
}

const ModelParams& aggregate(AggregatorState& state, const UpdateMap& updates) {
  return smooth_and_commit(state, weighted_candidate(state, updates), true);
}

const ModelParams& baseline_aggregate(BaselineKind kind, AggregatorState& state,
                                      const UpdateMap& updates) {
  switch (kind) {
    case BaselineKind::kAwcOnly:
      return smooth_and_commit(state, weighted_candidate(state, updates), false);
    case BaselineKind::kUniformAverage: {
      std::vector<double> next = state.global.flatten();
      if (!updates.empty()) {
        std::vector<double> acc(next.size(), 0.0);
        for (const auto& [node, delta] : updates) {
          check_update(state, node, delta);
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 1.0 * delta[i];
        }
        const double scale = state.config.eta_g / static_cast<double>(updates.size());
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += scale * acc[i];
      }
      state.last_psi = 0.0;
      return commit(state, ModelParams::from_flat(state.global.shape(), std::move(next)));
    }
    case BaselineKind::kCachedUpdate: {
      for (const auto& [node, delta] : updates) {
        check_update(state, node, delta);
        state.cache[node] = delta;
      }
      std::vector<double> next = state.global.flatten();
      std::vector<double> acc(next.size(), 0.0);
      for (const auto& cached : state.cache) {
        if (!cached) continue;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 1.0 * (*cached)[i];
      }
      const double scale = state.config.eta_g / static_cast<double>(state.num_nodes());
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += scale * acc[i];
      state.last_psi = 0.0;
      return commit(state, ModelParams::from_flat(state.global.shape(), std::move(next)));
    }
  }
  return state.global;
}

}  // namespace pmfl
