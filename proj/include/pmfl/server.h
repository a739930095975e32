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

#ifndef PMFL_SERVER_H_
#define PMFL_SERVER_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pmfl/nn.h"

namespace pmfl {

// Cutoff value that disables cutoff events (C = infinity).
inline constexpr std::int64_t kNoCutoff = 0;

// Per-node bookkeeping of the adaptive aggregation weight.
struct NodeWeight {
  std::int64_t interval = 0;  // Q_k: rounds since the last weight-update event
  std::int64_t events = 0;    // R_k: weight-update events so far
  double weight = 1.0;        // x_k: mean recorded interval

  bool operator==(const NodeWeight&) const = default;
};

enum class AggregationMode {
  kCorrected,     // W + (eta_g / K) * sum_k x_k * delta_k
  kPaperLiteral,  // W - eta_g * sum_k x_k * delta_k
};

AggregationMode parse_aggregation_mode(std::string_view name);
std::string_view aggregation_mode_name(AggregationMode mode);

enum class BaselineKind { kUniformAverage, kCachedUpdate, kAwcOnly };

BaselineKind parse_baseline(std::string_view name);

struct AggregatorConfig {
  double eta_g = 1.0;
  std::size_t history = 3;  // H, size of the global sliding buffer
  std::int64_t horizon = 2;  // T
  std::int64_t cutoff = 50;  // C; kNoCutoff disables cutoffs
  AggregationMode mode = AggregationMode::kCorrected;
  // When false every x_k is treated as 1 during aggregation.
  bool adaptive_weights = true;
};

// Flat updates keyed by node id. Absent nodes contribute zero.
using UpdateMap = std::map<std::size_t, std::vector<double>>;

// Server-side state. The global sliding buffer is `history` (previous
// global models, oldest first, at most H - 1 of them) plus `global`.
struct AggregatorState {
  AggregatorState() = default;
  AggregatorState(ModelParams initial, std::size_t num_nodes, AggregatorConfig config);

  AggregatorConfig config;
  std::int64_t round = 0;
  ModelParams global;
  std::deque<ModelParams> history;
  std::vector<NodeWeight> nodes;
  // Latest update per node for the cached-update baseline.
  std::vector<std::optional<std::vector<double>>> cache;
  double last_psi = 0.0;

  std::size_t num_nodes() const { return nodes.size(); }
  std::vector<double> weights() const;
};

// psi(t) = 1/2 - t / (2 (T - 1)). Throws ConfigError when T < 2.
double psi_schedule(std::int64_t t, std::int64_t horizon);

// Advances every node's interval and records weight-update events for
// participants and for nodes whose interval reached the cutoff. Returns x.
std::vector<double> update_weights(AggregatorState& state,
                                   std::span<const std::uint8_t> indicators);

// Weighted update followed by historical-global smoothing; advances the
// round and pushes the previous global model into the history.
const ModelParams& aggregate(AggregatorState& state, const UpdateMap& updates);

// Stand-in aggregators. kUniformAverage: W + eta_g * mean of received
// updates. kCachedUpdate: remembers each node's latest update and applies
// W + eta_g / K * sum of all cached updates. kAwcOnly: aggregate() without
// historical smoothing.
const ModelParams& baseline_aggregate(BaselineKind kind, AggregatorState& state,
                                      const UpdateMap& updates);

}  // namespace pmfl

#endif  // PMFL_SERVER_H_
