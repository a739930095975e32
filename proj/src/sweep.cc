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

#include "pmfl/sweep.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pmfl/common.h"
#include "pmfl/experiment.h"
#include "pmfl/metrics.h"

namespace pmfl {
namespace {

const char* const kSummaryColumns[] = {
    "final_test_accuracy",        "top5_test_accuracy",          "final_train_accuracy",
    "top5_train_accuracy",        "mean_deviation",              "mean_deviation_last_quarter",
    "test_accuracy_std_last_100", "mean_participants_per_round",
};

std::string cell_value(const nlohmann::json& summary, const char* key) {
  if (!summary.contains(key) || !summary[key].is_number()) return "";
  return format_double(summary[key].get<double>());
}

}  // namespace

std::string canonical_key(const std::string& key) {
  if (key == "C") return "cutoff";
  if (key == "H") return "global_buffer";
  if (key == "N") return "local_buffer";
  if (key == "E") return "local_iterations";
  if (key == "K") return "num_nodes";
  if (key == "T") return "rounds";
  return key;
}

GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError(spec, "grid axis must look like key=v1,v2,...");
  }
  GridAxis axis{canonical_key(spec.substr(0, eq)), {}};
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) axis.values.push_back(item);
  }
  if (axis.values.empty()) throw ConfigError(axis.key, "grid axis has no values");
  ExperimentConfig probe;
  set_config_value(probe, axis.key, axis.values.front());  // rejects unknown keys early
  return axis;
}

std::vector<SweepCell> sweep(const ExperimentConfig& base, const std::vector<GridAxis>& grid,
                             const SweepOptions& options) {
  std::size_t points = 1;
  for (const auto& axis : grid) points *= axis.values.size();
  const std::size_t seeds = std::max<std::size_t>(options.seeds, 1);

  std::vector<SweepCell> cells;
  cells.reserve(points * seeds);
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<std::pair<std::string, std::string>> settings(grid.size());
    std::size_t rest = p;
    for (std::size_t a = grid.size(); a-- > 0;) {
      const auto& axis = grid[a];
      settings[a] = {axis.key, axis.values[rest % axis.values.size()]};
      rest /= axis.values.size();
    }
    for (std::size_t s = 0; s < seeds; ++s) {
      SweepCell cell;
      cell.index = cells.size();
      cell.settings = settings;
      cell.seed = base.seed + s;
      try {
        ExperimentConfig cfg = base;
        for (const auto& [k, v] : settings) set_config_value(cfg, k, v);
        cfg.seed = cell.seed;
        RunOptions run_options;
        if (!options.output_dir.empty()) {
          run_options.output_dir =
              (std::filesystem::path(options.output_dir) / ("cell_" + std::to_string(cell.index)))
                  .string();
        }
        cell.summary = run_experiment(cfg, run_options).summary;
      } catch (const std::exception& e) {
        cell.error = e.what();
        spdlog::error("sweep cell {} failed: {}", cell.index, e.what());
      }
      cells.push_back(std::move(cell));
    }
  }
  if (!options.output_dir.empty()) {
    std::filesystem::create_directories(options.output_dir);
    std::ofstream out(std::filesystem::path(options.output_dir) / "sweep.csv");
    out << sweep_table_csv(grid, cells);
  }
  return cells;
}

std::string sweep_table_csv(const std::vector<GridAxis>& grid,
                            const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os << "cell";
  for (const auto& axis : grid) os << ',' << axis.key;
  os << ",seed,status";
  for (const char* col : kSummaryColumns) os << ',' << col;
  os << '\n';
  for (const auto& cell : cells) {
    os << cell.index;
    for (const auto& kv : cell.settings) os << ',' << kv.second;
    os << ',' << cell.seed << ',' << (cell.error.empty() ? "ok" : "error");
    for (const char* col : kSummaryColumns) os << ',' << cell_value(cell.summary, col);
    os << '\n';
  }
  return os.str();
}

}  // namespace pmfl
