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

#ifndef PMFL_HETEROGENEITY_H_
#define PMFL_HETEROGENEITY_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmfl/dataset.h"
#include "pmfl/random.h"

namespace pmfl {

// Probability vector over classes for one node.
using ClassDistribution = std::vector<double>;

struct PartitionResult {
  std::vector<std::vector<std::size_t>> shard_indices;  // per node, ascending
  std::vector<ClassDistribution> class_distributions;   // empirical, per node
  int attempts = 1;
};

// Label-skew partition: every node draws class preferences from
// Dirichlet(alpha); each class is split among nodes in proportion to those
// preferences with largest-remainder rounding. Redraws (up to max_attempts)
// while any node is left empty, then throws ValidationError.
PartitionResult dirichlet_partition(const Dataset& dataset, std::size_t num_nodes,
                                    double alpha, std::uint64_t seed,
                                    int max_attempts = 100);

struct FrequencyAssignment {
  std::vector<double> direction;  // Dirichlet(beta) sample over classes
  double normalizer = 1.0;        // r
  std::vector<double> raw;        // <direction, D_k> / r before flooring
  std::vector<double> frequencies;
  double realized_mean = 0.0;     // mean of the floored/clamped frequencies
};

// p_k = clamp(<Z, D_k> / r, 0.02, 1) with r = mean_k <Z, D_k> / target_mean.
FrequencyAssignment assign_frequencies(const std::vector<ClassDistribution>& dists,
                                       double beta, double target_mean,
                                       std::uint64_t seed);

// Same formula with a caller-supplied direction vector.
FrequencyAssignment assign_frequencies_with_direction(
    const std::vector<ClassDistribution>& dists, std::vector<double> direction,
    double target_mean);

// Per-node shard sizes, class histograms, D_k and p_k for auditing.
nlohmann::json heterogeneity_manifest(const PartitionResult& partition,
                                      const Dataset& dataset,
                                      const FrequencyAssignment& freqs);

// node,p_k,count_class_0..count_class_{C-1}
std::string class_histogram_csv(const PartitionResult& partition,
                                const Dataset& dataset,
                                const FrequencyAssignment& freqs);

}  // namespace pmfl

#endif  // PMFL_HETEROGENEITY_H_
