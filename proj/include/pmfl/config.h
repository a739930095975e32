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

#ifndef PMFL_CONFIG_H_
#define PMFL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pmfl/nn.h"
#include "pmfl/participation.h"
#include "pmfl/server.h"

namespace pmfl {

enum class DatasetSource { kSyntheticGaussianMixture, kCsvFile };

struct DatasetSpec {
  DatasetSource source = DatasetSource::kSyntheticGaussianMixture;
  std::size_t num_classes = 10;
  std::size_t input_dim = 16;
  std::size_t samples_per_class = 300;
  double test_fraction = 0.2;
  // Class means sit at separation * e_c (first num_classes coordinates).
  double separation = 1.0;
  // Isotropic standard deviation of every mixture component.
  double noise = 0.35;
  std::string path;  // csv_file only
  bool standardize = false;
  std::uint64_t seed = 7;
};

enum class Variant { kPmfl, kWoMct, kWoAwc, kWoHgm, kUniformAverage, kCachedUpdate };

Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v);

struct ExperimentConfig {
  std::size_t num_nodes = 30;       // K
  std::int64_t rounds = 400;        // T
  double alpha = 0.1;
  double beta = 0.05;
  double target_frequency = 0.1;    // E[p_k]
  Pattern pattern = Pattern::kBernoulli;
  bool full_participation = false;  // overrides every p_k with 1
  double p01 = kDefaultP01;
  int cycle_length = kDefaultCycleLength;
  int local_iterations = 5;         // E
  double eta_local = 0.1;
  double eta_global = 1.0;
  double tau = 0.5;
  double lambda = 0.5;
  std::size_t local_buffer = 5;     // N
  std::size_t global_buffer = 3;    // H
  std::int64_t cutoff = 50;         // C, kNoCutoff = infinite
  std::size_t batch_size = 32;
  std::vector<std::size_t> encoder_dims{32, 32};
  std::vector<std::size_t> projection_dims{32};
  std::vector<std::size_t> classifier_hidden{};
  AggregationMode aggregation_mode = AggregationMode::kCorrected;
  Variant variant = Variant::kPmfl;
  DatasetSpec dataset;
  std::uint64_t seed = 1;
  std::int64_t eval_every = 10;     // rounds between evaluations
  bool eval_train = true;
  std::size_t workers = 1;
  std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::int64_t stop_after = -1;       // simulate an interruption after this round

  ModelShape model_shape() const;
};

// Full-scale hyper-parameters (K = 250, T = 10000, ...).
ExperimentConfig paper_profile();
// Small profile that finishes a full run in seconds.
ExperimentConfig desk_profile();

// Effective per-variant settings.
struct ResolvedVariant {
  double lambda;
  std::size_t local_buffer;
  std::size_t global_buffer;
  bool adaptive_weights;
  enum class Aggregator { kPmfl, kAwcOnly, kUniformAverage, kCachedUpdate } aggregator;
};

ResolvedVariant resolve_variant(const ExperimentConfig& cfg);

// Named accessor for one configuration key.
struct ConfigField {
  std::string name;
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool affects_results = true;  // false for workers / checkpoint cadence
};

const std::vector<ConfigField>& config_fields();

// Sets one key from its textual value. Unknown keys and unparsable values
// throw ConfigError naming the key.
void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

// Range and consistency checks; throws ConfigError with the field path.
void validate(const ExperimentConfig& cfg);

// Parses "key = value" lines; '#' starts a comment. Later keys override
// earlier ones.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// Every key with its resolved value, in registry order.
std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg);
std::string config_to_text(const ExperimentConfig& cfg);

// Canonical text of the keys that influence results.
std::string result_fingerprint(const ExperimentConfig& cfg);

}  // namespace pmfl

#endif  // PMFL_CONFIG_H_
