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

// Command-line front end: run, sweep, synth-data, inspect.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "pmfl/common.h"
#include "pmfl/config.h"
#include "pmfl/datasets.h"
#include "pmfl/experiment.h"
#include "pmfl/sweep.h"

namespace fs = std::filesystem;

namespace {

// Config sources shared by every verb that builds an ExperimentConfig.
struct ConfigFlags {
  std::string profile = "desk";
  std::string config_path;
  std::map<std::string, std::string> field_values;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "starting profile: desk | paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app->add_option("-c,--config", config_path, "key = value config file");
    app->add_option("--set", overrides, "key=value override (repeatable)");
    for (const auto& field : pmfl::config_fields()) {
      app->add_option("--" + field.name, field_values[field.name], field.help)
          ->group("Config fields");
    }
  }

  pmfl::ExperimentConfig build(CLI::App* app) const {
    pmfl::ExperimentConfig cfg =
        profile == "paper" ? pmfl::paper_profile() : pmfl::desk_profile();
    if (!config_path.empty()) cfg = pmfl::load_config_file(config_path, cfg);
    for (const auto& field : pmfl::config_fields()) {
      if (app->count("--" + field.name) > 0) {
        pmfl::set_config_value(cfg, field.name, field_values.at(field.name));
      }
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw pmfl::ConfigError(kv, "--set expects key=value");
      pmfl::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    pmfl::validate(cfg);
    return cfg;
  }
};

void print_summary(const nlohmann::json& summary) {
  for (const auto& [k, v] : summary.items()) std::cout << "  " << k << ": " << v << "\n";
}

int cmd_inspect(const std::string& dir) {
  const fs::path root(dir);
  auto read_json = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw pmfl::ValidationError("cannot open " + p.string());
    return nlohmann::json::parse(in);
  };
  if (fs::exists(root / "sweep.csv")) {
    std::ifstream in(root / "sweep.csv");
    std::cout << in.rdbuf();
    return 0;
  }
  const auto manifest = read_json(root / "manifest.json");
  std::cout << "manifest (" << manifest.at("tool").get<std::string>() << " "
            << manifest.at("version").get<std::string>() << ")\n";
  for (const auto& [k, v] : manifest.at("config").items()) {
    std::cout << "  " << k << " = " << v.get<std::string>() << "\n";
  }
  std::cout << "seeds: " << manifest.at("seeds").dump() << "\n";
  if (fs::exists(root / "summary.json")) {
    std::cout << "summary\n";
    print_summary(read_json(root / "summary.json"));
  }
  if (fs::exists(root / "checkpoint.bin")) {
    std::cout << "checkpoint present: run was interrupted (resume with `pmfl run --resume`)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PMFL federated-learning simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

  // run
  auto* run = app.add_subcommand("run", "run one experiment");
  ConfigFlags run_flags;
  run_flags.attach(run);
  std::string run_out = "pmfl_run";
  bool resume = false;
  bool print_config = false;
  run->add_option("-o,--out", run_out, "output directory");
  run->add_flag("--resume", resume, "continue from <out>/checkpoint.bin");
  run->add_flag("--print-config", print_config, "print the resolved config and exit");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a grid of experiments");
  ConfigFlags sweep_flags;
  sweep_flags.attach(sw);
  std::vector<std::string> grid_specs;
  std::string sweep_out = "pmfl_sweep";
  std::size_t seeds = 1;
  sw->add_option("-g,--grid", grid_specs, "axis key=v1,v2,... (repeatable)")->required();
  sw->add_option("--seeds", seeds, "seeds per grid point");
  sw->add_option("-o,--out", sweep_out, "output directory");

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "write the synthetic dataset as CSV");
  ConfigFlags synth_flags;
  synth_flags.attach(synth);
  std::string train_csv = "train.csv";
  std::string test_csv = "test.csv";
  synth->add_option("--train-out", train_csv, "training split CSV path");
  synth->add_option("--test-out", test_csv, "test split CSV path");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print a run's manifest and summary");
  std::string inspect_dir;
  inspect->add_option("dir", inspect_dir, "run or sweep output directory")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (run->parsed()) {
      const auto cfg = run_flags.build(run);
      if (print_config) {
        std::cout << pmfl::config_to_text(cfg);
        return 0;
      }
      const auto result = pmfl::run_experiment(cfg, {run_out, resume});
      std::cout << (result.completed ? "run complete" : "run interrupted") << ", outputs in "
                << run_out << "\n";
      print_summary(result.summary);
      return 0;
    }
    if (sw->parsed()) {
      const auto base = sweep_flags.build(sw);
      std::vector<pmfl::GridAxis> grid;
      for (const auto& spec : grid_specs) grid.push_back(pmfl::parse_grid_axis(spec));
      const auto cells = pmfl::sweep(base, grid, {sweep_out, seeds});
      std::cout << pmfl::sweep_table_csv(grid, cells);
      return 0;
    }
    if (synth->parsed()) {
      const auto cfg = synth_flags.build(synth);
      const auto data = pmfl::load_dataset(cfg.dataset);
      std::ofstream(train_csv) << pmfl::export_csv(data.train);
      std::ofstream(test_csv) << pmfl::export_csv(data.test);
      std::cout << "wrote " << data.train.size() << " training and " << data.test.size()
                << " test samples\n";
      return 0;
    }
    if (inspect->parsed()) return cmd_inspect(inspect_dir);
  } catch (const pmfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
