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

#ifndef PMFL_SWEEP_H_
#define PMFL_SWEEP_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmfl/config.h"

namespace pmfl {

// One grid dimension: a config key (or the short aliases C, H, N, E, K, T)
// and the values it takes.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

// Parses "key=v1,v2,...".
GridAxis parse_grid_axis(const std::string& spec);

// Resolves C/H/N/E/K/T to their config keys; other names pass through.
std::string canonical_key(const std::string& key);

struct SweepOptions {
  std::string output_dir;  // one subdirectory per cell when set
  std::size_t seeds = 1;   // seeds base, base + 1, ... per grid point
};

struct SweepCell {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> settings;
  std::uint64_t seed = 0;
  nlohmann::json summary;
  std::string error;  // empty on success
};

// Runs the Cartesian product of the axes in row-major order (last axis
// fastest), seeds innermost. A failing cell records its error and the sweep
// continues.
std::vector<SweepCell> sweep(const ExperimentConfig& base, const std::vector<GridAxis>& grid,
                             const SweepOptions& options = {});

// cell,<axis keys>,seed,status,<summary columns>
std::string sweep_table_csv(const std::vector<GridAxis>& grid,
                            const std::vector<SweepCell>& cells);

}  // namespace pmfl

#endif  // PMFL_SWEEP_H_
