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

#include "pmfl/heterogeneity.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pmfl/common.h"

namespace pmfl {
namespace {

// Splits `count` items among nodes proportionally to `weights` with
// largest-remainder rounding; leftover items go round-robin down the list
// of nodes ordered by fractional part (ties by node id).
std::vector<std::size_t> allocate(std::size_t count, const std::vector<double>& weights) {
  const std::size_t k = weights.size();
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> share(k);
  for (std::size_t i = 0; i < k; ++i) {
    share[i] = total > 0.0 ? weights[i] / total : 1.0 / static_cast<double>(k);
  }
  std::vector<std::size_t> out(k);
  std::vector<double> frac(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double expected = share[i] * static_cast<double>(count);
    out[i] = static_cast<std::size_t>(std::floor(expected));
    frac[i] = expected - std::floor(expected);
    assigned += out[i];
  }
  if (assigned > count) {
    // Only reachable through rounding of shares summing above 1.
    for (std::size_t i = k; assigned > count && i-- > 0;) {
      const std::size_t take = std::min(out[i], assigned - count);
      out[i] -= take;
      assigned -= take;
    }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; assigned < count; ++j, ++assigned) ++out[order[j % k]];
  return out;
}

ClassDistribution empirical_distribution(const Dataset& dataset,
                                         const std::vector<std::size_t>& indices) {
  ClassDistribution d(dataset.num_classes, 0.0);
  for (std::size_t idx : indices) d[dataset.labels[idx]] += 1.0;
  if (!indices.empty()) {
    for (double& v : d) v /= static_cast<double>(indices.size());
  }
  return d;
}

}  // namespace

PartitionResult dirichlet_partition(const Dataset& dataset, std::size_t num_nodes,
                                    double alpha, std::uint64_t seed, int max_attempts) {
  if (!(alpha > 0.0)) throw ValidationError("Dirichlet alpha must be positive");
  if (num_nodes == 0) throw ValidationError("need at least one node");
  dataset.validate();
  if (dataset.size() < num_nodes) {
    throw ValidationError("fewer samples than nodes; some node would be empty");
  }

  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    Rng rng = make_rng(seed, streams::kPartition, static_cast<std::uint64_t>(attempt));
    std::vector<std::vector<double>> prefs(num_nodes);
    for (auto& row : prefs) row = sample_dirichlet(alpha, dataset.num_classes, rng);

    PartitionResult result;
    result.attempts = attempt;
    result.shard_indices.assign(num_nodes, {});
    for (std::size_t c = 0; c < dataset.num_classes; ++c) {
      std::vector<std::size_t> members = by_class[c];
      shuffle(std::span<std::size_t>(members), rng);
      std::vector<double> weights(num_nodes);
      for (std::size_t k = 0; k < num_nodes; ++k) weights[k] = prefs[k][c];
      const auto counts = allocate(members.size(), weights);
      std::size_t cursor = 0;
      for (std::size_t k = 0; k < num_nodes; ++k) {
        auto& shard = result.shard_indices[k];
        shard.insert(shard.end(), members.begin() + cursor,
                     members.begin() + cursor + counts[k]);
        cursor += counts[k];
      }
    }
    const bool degenerate =
        std::any_of(result.shard_indices.begin(), result.shard_indices.end(),
                    [](const auto& s) { return s.empty(); });
    if (degenerate) {
      spdlog::debug("partition attempt {} left a node empty; redrawing", attempt);
      continue;
    }
    for (auto& shard : result.shard_indices) std::sort(shard.begin(), shard.end());
    for (const auto& shard : result.shard_indices) {
      result.class_distributions.push_back(empirical_distribution(dataset, shard));
    }
    return result;
  }
  throw ValidationError("degenerate partition: a node received no samples after " +
                        std::to_string(max_attempts) + " attempts");
}

FrequencyAssignment assign_frequencies_with_direction(
    const std::vector<ClassDistribution>& dists, std::vector<double> direction,
    double target_mean) {
  if (!(target_mean > kMinParticipationFrequency && target_mean <= 1.0)) {
    throw ValidationError("target mean frequency must lie in (0.02, 1]");
  }
  FrequencyAssignment out;
  out.direction = std::move(direction);
  std::vector<double> inner(dists.size());
  for (std::size_t k = 0; k < dists.size(); ++k) {
    if (dists[k].size() != out.direction.size()) {
      throw ShapeError("class distribution and direction lengths differ");
    }
    inner[k] = std::inner_product(dists[k].begin(), dists[k].end(),
                                  out.direction.begin(), 0.0);
  }
  const double mean_inner =
      dists.empty() ? 0.0
                    : std::accumulate(inner.begin(), inner.end(), 0.0) /
                          static_cast<double>(dists.size());
  if (mean_inner > 0.0) {
    out.normalizer = mean_inner / target_mean;
  } else {
    spdlog::warn("direction vector is orthogonal to every class distribution; all frequencies floored");
    out.normalizer = 1.0;
  }
  bool clamped = false;
  for (double v : inner) {
    const double raw = v / out.normalizer;
    out.raw.push_back(raw);
    double p = raw >= kMinParticipationFrequency ? raw : kMinParticipationFrequency;
    if (p > 1.0) {
      p = 1.0;
      clamped = true;
    }
    out.frequencies.push_back(p);
  }
  if (clamped) spdlog::warn("participation frequencies above 1 were clamped to 1");
  if (!out.frequencies.empty()) {
    out.realized_mean = std::accumulate(out.frequencies.begin(), out.frequencies.end(), 0.0) /
                        static_cast<double>(out.frequencies.size());
  }
  return out;
}

FrequencyAssignment assign_frequencies(const std::vector<ClassDistribution>& dists,
                                       double beta, double target_mean,
                                       std::uint64_t seed) {
  if (!(beta > 0.0)) throw ValidationError("Dirichlet beta must be positive");
  if (dists.empty()) throw ValidationError("no class distributions given");
  Rng rng = make_rng(seed, streams::kFrequencies);
  return assign_frequencies_with_direction(
      dists, sample_dirichlet(beta, dists.front().size(), rng), target_mean);
}

nlohmann::json heterogeneity_manifest(const PartitionResult& partition,
                                      const Dataset& dataset,
                                      const FrequencyAssignment& freqs) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t k = 0; k < partition.shard_indices.size(); ++k) {
    std::vector<std::size_t> hist(dataset.num_classes, 0);
    for (std::size_t idx : partition.shard_indices[k]) ++hist[dataset.labels[idx]];
    nlohmann::json node = {
        {"node", k},
        {"samples", partition.shard_indices[k].size()},
        {"class_counts", hist},
        {"class_distribution", partition.class_distributions[k]},
    };
    if (k < freqs.frequencies.size()) node["participation_frequency"] = freqs.frequencies[k];
    nodes.push_back(std::move(node));
  }
  return {
      {"partition_attempts", partition.attempts},
      {"direction", freqs.direction},
      {"normalizer", freqs.normalizer},
      {"realized_mean_frequency", freqs.realized_mean},
      {"nodes", std::move(nodes)},
  };
}

std::string class_histogram_csv(const PartitionResult& partition,
                                const Dataset& dataset,
                                const FrequencyAssignment& freqs) {
  std::ostringstream os;
  os.precision(17);
  os << "node,p_k";
  for (std::size_t c = 0; c < dataset.num_classes; ++c) os << ",class_" << c;
  os << '\n';
  for (std::size_t k = 0; k < partition.shard_indices.size(); ++k) {
    std::vector<std::size_t> hist(dataset.num_classes, 0);
    for (std::size_t idx : partition.shard_indices[k]) ++hist[dataset.labels[idx]];
    os << k << ',' << (k < freqs.frequencies.size() ? freqs.frequencies[k] : 0.0);
    for (auto h : hist) os << ',' << h;
    os << '\n';
  }
  return os.str();
}

}  // namespace pmfl
