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

#include "pmfl/experiment.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/deque.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>
#include <spdlog/spdlog.h>

#include "pmfl/client.h"
#include "pmfl/common.h"
#include "pmfl/datasets.h"
#include "pmfl/random.h"
#include "pmfl/server.h"

namespace fs = std::filesystem;

namespace pmfl {

// Non-intrusive cereal serializers for checkpointed state.
template <class Archive>
void save(Archive& ar, const ModelParams& p) {
  const ModelShape& s = p.shape();
  ar(s.input_dim(), s.encoder(), s.projection(), s.classifier(), p.flatten());
}

template <class Archive>
void load(Archive& ar, ModelParams& p) {
  std::size_t input_dim = 0;
  std::vector<std::size_t> enc, pro, cls;
  std::vector<double> values;
  ar(input_dim, enc, pro, cls, values);
  p = ModelParams::from_flat(ModelShape(input_dim, enc, pro, cls), std::move(values));
}

template <class Archive>
void serialize(Archive& ar, NodeWeight& w) {
  ar(w.interval, w.events, w.weight);
}

template <class Archive>
void serialize(Archive& ar, Evaluation& e) {
  ar(e.accuracy, e.loss);
}

template <class Archive>
void serialize(Archive& ar, RoundMetrics& r) {
  ar(r.round, r.participants, r.deviation, r.psi, r.weights, r.train, r.test);
}

namespace {

constexpr const char* kCheckpointFile = "checkpoint.bin";

struct NodeSnapshot {
  std::deque<ModelParams> buffer;
  std::int64_t last_round = -1;
  std::size_t rounds_trained = 0;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(buffer, last_round, rounds_trained);
  }
};

struct Checkpoint {
  std::string fingerprint;
  std::int64_t next_round = 0;
  std::int64_t agg_round = 0;
  ModelParams global;
  std::deque<ModelParams> history;
  std::vector<NodeWeight> weights;
  std::vector<std::optional<std::vector<double>>> cache;
  double last_psi = 0.0;
  std::vector<NodeSnapshot> nodes;
  std::vector<RoundMetrics> rounds;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(fingerprint, next_round, agg_round, global, history, weights, cache, last_psi,
       nodes, rounds);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& cp) {
  fs::create_directories(dir);
  const fs::path tmp = dir / (std::string(kCheckpointFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint in " + dir.string());
    cereal::PortableBinaryOutputArchive ar(out);
    ar(cp);
  }
  fs::rename(tmp, dir / kCheckpointFile);
}

std::optional<Checkpoint> load_checkpoint(const fs::path& dir) {
  const fs::path path = dir / kCheckpointFile;
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  cereal::PortableBinaryInputArchive ar(in);
  Checkpoint cp;
  ar(cp);
  return cp;
}

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<std::optional<std::vector<double>>> train_participants(
    std::vector<NodeState>& nodes, const std::vector<std::size_t>& active,
    const ModelParams& global, const LocalTrainConfig& local_cfg, std::int64_t round,
    std::size_t workers) {
  std::vector<std::optional<std::vector<double>>> results(active.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < active.size(); i += stride) {
      results[i] = local_train(nodes[active[i]], global, local_cfg, round);
    }
  };
  const std::size_t threads = std::min(workers, active.size());
  if (threads <= 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, threads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace

double stddev(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RoundMetrics>& rounds,
                         const FrequencyAssignment& freqs) {
  nlohmann::json s;
  s["variant"] = std::string(variant_name(cfg.variant));
  s["rounds_completed"] = rounds.size();
  std::vector<double> test_acc;
  std::vector<double> train_acc;
  std::vector<double> tail_acc;
  std::vector<double> devs;
  std::vector<double> tail_devs;
  double participation = 0.0;
  const std::int64_t quarter_start = cfg.rounds - cfg.rounds / 4;
  for (const auto& r : rounds) {
    participation += static_cast<double>(r.participants);
    if (r.deviation) {
      devs.push_back(*r.deviation);
      if (r.round >= quarter_start) tail_devs.push_back(*r.deviation);
    }
    if (r.test) {
      test_acc.push_back(r.test->accuracy);
      if (r.round >= cfg.rounds - 100) tail_acc.push_back(r.test->accuracy);
    }
    if (r.train) train_acc.push_back(r.train->accuracy);
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? std::nan("")
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const auto last_eval = std::find_if(rounds.rbegin(), rounds.rend(),
                                      [](const RoundMetrics& r) { return r.evaluated(); });
  if (last_eval != rounds.rend()) {
    s["final_round"] = last_eval->round;
    s["final_test_accuracy"] = last_eval->test->accuracy;
    s["final_test_loss"] = last_eval->test->loss;
    if (last_eval->train) {
      s["final_train_accuracy"] = last_eval->train->accuracy;
      s["final_train_loss"] = last_eval->train->loss;
    }
  }
  if (!test_acc.empty()) s["top5_test_accuracy"] = top5_mean(test_acc);
  if (!train_acc.empty()) s["top5_train_accuracy"] = top5_mean(train_acc);
  if (!devs.empty()) s["mean_deviation"] = mean(devs);
  if (!tail_devs.empty()) s["mean_deviation_last_quarter"] = mean(tail_devs);
  if (!tail_acc.empty()) s["test_accuracy_std_last_100"] = stddev(tail_acc);
  s["mean_participants_per_round"] =
      rounds.empty() ? 0.0 : participation / static_cast<double>(rounds.size());
  s["mean_participation_frequency"] = freqs.realized_mean;
  return s;
}

nlohmann::json make_manifest(const ExperimentConfig& cfg) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : config_to_map(cfg)) config[k] = v;
  nlohmann::json seeds = {
      {"root", cfg.seed},
      {"dataset", cfg.dataset.seed},
      {"init", derive_seed(cfg.seed, streams::kInit)},
      {"frequencies", derive_seed(cfg.seed, streams::kFrequencies)},
  };
  return {
      {"tool", "pmfl"},
      {"version", kVersion},
      {"config", std::move(config)},
      {"seeds", std::move(seeds)},
      {"streams",
       {streams::kDataset, streams::kPartition, streams::kFrequencies,
        streams::kParticipation, streams::kTraining, streams::kInit}},
  };
}

void save_model(const ModelParams& params, const std::string& bin_path,
                const std::string& header_path) {
  const ModelShape& s = params.shape();
  nlohmann::json header = {
      {"dtype", "float64"},
      {"byte_order", "little"},
      {"count", params.size()},
      {"input_dim", s.input_dim()},
      {"encoder", s.encoder()},
      {"projection", s.projection()},
      {"classifier", s.classifier()},
      {"partitions",
       {{"encoder", {s.partition_range(Partition::kEncoder).first,
                     s.partition_range(Partition::kEncoder).second}},
        {"projection", {s.partition_range(Partition::kProjection).first,
                        s.partition_range(Partition::kProjection).second}},
        {"classifier", {s.partition_range(Partition::kClassifier).first,
                        s.partition_range(Partition::kClassifier).second}}}},
  };
  write_text(header_path, header.dump(2) + "\n");
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + bin_path);
  for (double v : params.flat()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

ModelParams load_model(const std::string& bin_path, const std::string& header_path) {
  std::ifstream hin(header_path);
  if (!hin) throw ValidationError("cannot open " + header_path);
  const auto header = nlohmann::json::parse(hin);
  const ModelShape shape(header.at("input_dim").get<std::size_t>(),
                         header.at("encoder").get<std::vector<std::size_t>>(),
                         header.at("projection").get<std::vector<std::size_t>>(),
                         header.at("classifier").get<std::vector<std::size_t>>());
  const auto count = header.at("count").get<std::size_t>();
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + bin_path);
  std::vector<double> values(count);
  for (double& v : values) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw ValidationError(bin_path + " is truncated");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  return ModelParams::from_flat(shape, std::move(values));
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const ResolvedVariant variant = resolve_variant(cfg);

  RunResult result;
  result.config = cfg;
  const TrainTestSplit data = load_dataset(cfg.dataset);
  if (data.train.num_classes != cfg.dataset.num_classes) {
    throw ConfigError("dataset.num_classes", "does not match the loaded data");
  }
  result.partition = dirichlet_partition(data.train, cfg.num_nodes, cfg.alpha, cfg.seed);
  result.frequencies = assign_frequencies(result.partition.class_distributions, cfg.beta,
                                          cfg.target_frequency, cfg.seed);
  if (cfg.full_participation) {
    std::fill(result.frequencies.frequencies.begin(), result.frequencies.frequencies.end(), 1.0);
    result.frequencies.realized_mean = 1.0;
  }
  const PatternParams pattern{cfg.pattern, cfg.p01, cfg.cycle_length};
  result.trace = generate_trace(result.frequencies.frequencies, pattern, cfg.seed,
                                static_cast<std::size_t>(cfg.rounds));

  const ModelShape shape = cfg.model_shape();
  Rng init_rng = make_rng(cfg.seed, streams::kInit);
  result.initial_model = ModelParams::glorot_uniform(shape, init_rng);

  std::vector<NodeState> nodes;
  nodes.reserve(cfg.num_nodes);
  for (std::size_t k = 0; k < cfg.num_nodes; ++k) {
    nodes.emplace_back(k, data.train.subset(result.partition.shard_indices[k]),
                       variant.local_buffer, cfg.seed);
  }

  AggregatorConfig agg_cfg;
  agg_cfg.eta_g = cfg.eta_global;
  agg_cfg.history = variant.global_buffer;
  agg_cfg.horizon = cfg.rounds == 0 ? 2 : cfg.rounds;  // psi is never evaluated when T = 0
  agg_cfg.cutoff = cfg.cutoff;
  agg_cfg.mode = cfg.aggregation_mode;
  agg_cfg.adaptive_weights = variant.adaptive_weights;
  AggregatorState agg(result.initial_model, cfg.num_nodes, agg_cfg);

  const LocalTrainConfig local_cfg{cfg.local_iterations, cfg.eta_local, cfg.batch_size,
                                   cfg.tau, variant.lambda};
  const std::string fingerprint = result_fingerprint(cfg);
  const fs::path out_dir = options.output_dir;

  std::int64_t start = 0;
  if (options.resume && !options.output_dir.empty()) {
    if (auto cp = load_checkpoint(out_dir)) {
      if (cp->fingerprint != fingerprint) {
        throw ConfigError("config", "checkpoint was written by a different configuration");
      }
      start = cp->next_round;
      agg.round = cp->agg_round;
      agg.global = std::move(cp->global);
      agg.history = std::move(cp->history);
      agg.nodes = std::move(cp->weights);
      agg.cache = std::move(cp->cache);
      agg.last_psi = cp->last_psi;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        nodes[k].buffer.clear();
        for (auto& m : cp->nodes[k].buffer) nodes[k].buffer.push(std::move(m));
        nodes[k].last_round = cp->nodes[k].last_round;
        nodes[k].rounds_trained = cp->nodes[k].rounds_trained;
      }
      result.rounds = std::move(cp->rounds);
      result.resumed_from = start;
      spdlog::info("resuming from round {}", start);
    }
  }

  auto make_checkpoint = [&](std::int64_t next_round) {
    Checkpoint cp;
    cp.fingerprint = fingerprint;
    cp.next_round = next_round;
    cp.agg_round = agg.round;
    cp.global = agg.global;
    cp.history = agg.history;
    cp.weights = agg.nodes;
    cp.cache = agg.cache;
    cp.last_psi = agg.last_psi;
    for (const auto& node : nodes) {
      cp.nodes.push_back({node.buffer.entries(), node.last_round, node.rounds_trained});
    }
    cp.rounds = result.rounds;
    return cp;
  };

  for (std::int64_t t = start; t < cfg.rounds; ++t) {
    std::vector<std::uint8_t> indicators = result.trace[static_cast<std::size_t>(t)];
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < indicators.size(); ++k) {
      if (indicators[k]) active.push_back(k);
    }
    auto trained = train_participants(nodes, active, agg.global, local_cfg, t, cfg.workers);

    UpdateMap updates;
    std::vector<std::vector<double>> nonzero;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (!trained[i]) {
        indicators[active[i]] = 0;
        continue;
      }
      if (!is_zero(*trained[i])) nonzero.push_back(*trained[i]);
      updates.emplace(active[i], std::move(*trained[i]));
    }

    RoundMetrics m;
    m.round = t;
    m.participants = updates.size();
    m.weights = update_weights(agg, indicators);
    if (!nonzero.empty()) m.deviation = deviation(nonzero);

    switch (variant.aggregator) {
      case ResolvedVariant::Aggregator::kPmfl:
        aggregate(agg, updates);
        break;
      case ResolvedVariant::Aggregator::kAwcOnly:
        baseline_aggregate(BaselineKind::kAwcOnly, agg, updates);
        break;
      case ResolvedVariant::Aggregator::kUniformAverage:
        baseline_aggregate(BaselineKind::kUniformAverage, agg, updates);
        break;
      case ResolvedVariant::Aggregator::kCachedUpdate:
        baseline_aggregate(BaselineKind::kCachedUpdate, agg, updates);
        break;
    }
    m.psi = agg.last_psi;

    if ((t + 1) % cfg.eval_every == 0 || t + 1 == cfg.rounds) {
      if (!data.test.empty()) m.test = evaluate(agg.global, data.test);
      if (cfg.eval_train) m.train = evaluate(agg.global, data.train);
      if (data.test.empty() && !m.train) m.test = evaluate(agg.global, data.train);
    }
    result.rounds.push_back(std::move(m));

    const bool interrupted = cfg.stop_after >= 0 && t == cfg.stop_after && t + 1 < cfg.rounds;
    const bool periodic = cfg.checkpoint_every > 0 && (t + 1) % cfg.checkpoint_every == 0;
    if (!options.output_dir.empty() && (interrupted || periodic)) {
      save_checkpoint(out_dir, make_checkpoint(t + 1));
    }
    if (interrupted) {
      result.completed = false;
      break;
    }
  }

  result.final_model = agg.global;
  for (const auto& node : nodes) {
    const Evaluation e = evaluate(agg.global, node.shard);
    result.node_accuracy.push_back(e.accuracy);
    result.node_loss.push_back(e.loss);
  }
  result.summary = summarize(cfg, result.rounds, result.frequencies);
  result.summary["completed"] = result.completed;

  if (!options.output_dir.empty()) {
    write_run_outputs(result, options.output_dir);
    if (result.completed) fs::remove(out_dir / kCheckpointFile);
  }
  return result;
}

void write_run_outputs(const RunResult& result, const std::string& dir) {
  const fs::path out(dir);
  fs::create_directories(out);
  write_text(out / "metrics.csv", metrics_csv(result.rounds));
  write_text(out / "weights.csv", weights_csv(result.rounds));
  write_text(out / "deviation.csv", deviation_csv(result.rounds));
  const std::vector<std::pair<std::string, std::vector<double>>> cdf_series = {
      {"node_accuracy", result.node_accuracy},
      {"node_loss", result.node_loss},
      {"participation_frequency", result.frequencies.frequencies},
      {"final_weight", result.rounds.empty() ? std::vector<double>{}
                                             : result.rounds.back().weights},
  };
  write_text(out / "cdf.csv", cdf_csv(cdf_series));
  write_text(out / "participation.csv", trace_csv(result.trace));
  const TrainTestSplit data = load_dataset(result.config.dataset);
  write_text(out / "heterogeneity.json",
             heterogeneity_manifest(result.partition, data.train, result.frequencies).dump(2) +
                 "\n");
  write_text(out / "class_histogram.csv",
             class_histogram_csv(result.partition, data.train, result.frequencies));
  write_text(out / "summary.json", result.summary.dump(2) + "\n");
  write_text(out / "manifest.json", make_manifest(result.config).dump(2) + "\n");
  save_model(result.final_model, (out / "model.bin").string(), (out / "model.json").string());
}

}  // namespace pmfl
