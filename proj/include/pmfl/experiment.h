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

#ifndef PMFL_EXPERIMENT_H_
#define PMFL_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmfl/config.h"
#include "pmfl/heterogeneity.h"
#include "pmfl/metrics.h"
#include "pmfl/nn.h"
#include "pmfl/participation.h"

namespace pmfl {

inline constexpr const char* kVersion = "0.3.0";

struct RunOptions {
  // Directory for all run outputs; empty keeps everything in memory.
  std::string output_dir;
  // Continue from <output_dir>/checkpoint.bin when present.
  bool resume = false;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<RoundMetrics> rounds;
  ModelParams initial_model;
  ModelParams final_model;
  PartitionResult partition;
  FrequencyAssignment frequencies;
  ParticipationTrace trace;
  // Final global model evaluated on every node's shard.
  std::vector<double> node_accuracy;
  std::vector<double> node_loss;
  nlohmann::json summary;
  bool completed = true;        // false when stopped by stop_after
  std::int64_t resumed_from = -1;  // first round executed after a resume
};

// Runs T rounds: participation indicators -> local training of participants
// -> weight update -> aggregation -> metrics. Writes every output file when
// an output directory is given. Fully determined by the result-affecting
// config keys; the worker count does not change any output byte.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// Summary statistics of a finished (or interrupted) run.
nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RoundMetrics>& rounds,
                         const FrequencyAssignment& freqs);

// Resolved config, code version and seeds.
nlohmann::json make_manifest(const ExperimentConfig& cfg);

// metrics.csv, weights.csv, deviation.csv, cdf.csv, participation.csv,
// heterogeneity.json, class_histogram.csv, summary.json, manifest.json,
// model.json + model.bin.
void write_run_outputs(const RunResult& result, const std::string& dir);

// Flat little-endian float64 parameters plus a JSON shape header.
void save_model(const ModelParams& params, const std::string& bin_path,
                const std::string& header_path);
ModelParams load_model(const std::string& bin_path, const std::string& header_path);

// Population standard deviation.
double stddev(const std::vector<double>& values);

}  // namespace pmfl

#endif  // PMFL_EXPERIMENT_H_
