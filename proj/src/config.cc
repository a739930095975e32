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

#include "pmfl/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pmfl/common.h"
#include "pmfl/metrics.h"

namespace pmfl {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const auto v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  const auto v = trim(value);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_dims(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  const auto v = trim(value);
  if (v.empty() || v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int<std::size_t>(key, item));
  return out;
}

std::string dims_text(const std::vector<std::size_t>& dims) {
  if (dims.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dims[i]);
  }
  return out;
}

template <typename T>
std::string int_text(T v) {
  return std::to_string(v);
}

#define PMFL_INT_FIELD(key, member, type, help_text)                                  \
  ConfigField {                                                                       \
    key, help_text,                                                                   \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_int<type>(key, v); }, \
        [](const ExperimentConfig& c) { return int_text(c.member); }                  \
  }

#define PMFL_REAL_FIELD(key, member, help_text)                                        \
  ConfigField {                                                                       \
    key, help_text,                                                                   \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_real(key, v); }, \
        [](const ExperimentConfig& c) { return format_double(c.member); }             \
  }

#define PMFL_BOOL_FIELD(key, member, help_text)                                        \
  ConfigField {                                                                       \
    key, help_text,                                                                   \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(key, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

#define PMFL_DIMS_FIELD(key, member, help_text)                                        \
  ConfigField {                                                                       \
    key, help_text,                                                                   \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_dims(key, v); }, \
        [](const ExperimentConfig& c) { return dims_text(c.member); }                 \
  }

std::vector<ConfigField> build_fields() {
  std::vector<ConfigField> f = {
      PMFL_INT_FIELD("num_nodes", num_nodes, std::size_t, "number of nodes K"),
      PMFL_INT_FIELD("rounds", rounds, std::int64_t, "communication rounds T"),
      PMFL_REAL_FIELD("alpha", alpha, "Dirichlet concentration of class distributions"),
      PMFL_REAL_FIELD("beta", beta, "Dirichlet concentration of the frequency direction"),
      PMFL_REAL_FIELD("target_frequency", target_frequency,
                      "expected participation frequency E[p_k] (probability per round)"),
      ConfigField{"pattern", "participation pattern: bernoulli | markovian | cyclic",
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.pattern = parse_pattern(trim(v));
                    } catch (const ValidationError& e) {
                      throw ConfigError("pattern", e.what());
                    }
                  },
                  [](const ExperimentConfig& c) { return std::string(pattern_name(c.pattern)); }},
      PMFL_BOOL_FIELD("full_participation", full_participation,
                      "every node participates every round (p_k = 1)"),
      PMFL_REAL_FIELD("p01", p01, "Markov transition probability 0 -> 1 (per round)"),
      PMFL_INT_FIELD("cycle_length", cycle_length, int, "cyclic pattern period (rounds)"),
      PMFL_INT_FIELD("local_iterations", local_iterations, int,
                     "local SGD steps E per participating round"),
      PMFL_REAL_FIELD("eta_local", eta_local, "local learning rate"),
      PMFL_REAL_FIELD("eta_global", eta_global, "global learning rate"),
      PMFL_REAL_FIELD("tau", tau, "contrastive temperature"),
      PMFL_REAL_FIELD("lambda", lambda, "weight of the contrastive term"),
      PMFL_INT_FIELD("local_buffer", local_buffer, std::size_t,
                     "local sliding buffer size N (models)"),
      PMFL_INT_FIELD("global_buffer", global_buffer, std::size_t,
                     "global sliding buffer size H (models)"),
      ConfigField{"cutoff", "cutoff interval C in rounds, or 'inf'",
                  [](ExperimentConfig& c, const std::string& v) {
                    const auto t = trim(v);
                    if (t == "inf" || t == "infinity" || t == "none") {
                      c.cutoff = kNoCutoff;
                      return;
                    }
                    c.cutoff = parse_int<std::int64_t>("cutoff", t);
                    if (c.cutoff < 1) throw ConfigError("cutoff", "must be >= 1 or 'inf'");
                  },
                  [](const ExperimentConfig& c) {
                    return c.cutoff == kNoCutoff ? std::string("inf") : std::to_string(c.cutoff);
                  }},
      PMFL_INT_FIELD("batch_size", batch_size, std::size_t, "minibatch size (samples)"),
      PMFL_DIMS_FIELD("encoder_dims", encoder_dims, "encoder layer widths, comma separated"),
      PMFL_DIMS_FIELD("projection_dims", projection_dims,
                      "projection layer widths, comma separated"),
      PMFL_DIMS_FIELD("classifier_hidden", classifier_hidden,
                      "hidden classifier widths before the output layer, or 'none'"),
      ConfigField{"aggregation_mode", "corrected | paper_literal",
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.aggregation_mode = parse_aggregation_mode(trim(v));
                    } catch (const ValidationError& e) {
                      throw ConfigError("aggregation_mode", e.what());
                    }
                  },
                  [](const ExperimentConfig& c) {
                    return std::string(aggregation_mode_name(c.aggregation_mode));
                  }},
      ConfigField{"variant",
                  "pmfl | wo_mct | wo_awc | wo_hgm | uniform_average | cached_update",
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.variant = parse_variant(trim(v));
                    } catch (const ValidationError& e) {
                      throw ConfigError("variant", e.what());
                    }
                  },
                  [](const ExperimentConfig& c) { return std::string(variant_name(c.variant)); }},
      ConfigField{"dataset.source", "synthetic_gaussian_mixture | csv_file",
                  [](ExperimentConfig& c, const std::string& v) {
                    const auto t = trim(v);
                    if (t == "synthetic_gaussian_mixture") {
                      c.dataset.source = DatasetSource::kSyntheticGaussianMixture;
                    } else if (t == "csv_file") {
                      c.dataset.source = DatasetSource::kCsvFile;
                    } else {
                      throw ConfigError("dataset.source", "unknown source '" + t + "'");
                    }
                  },
                  [](const ExperimentConfig& c) {
                    return std::string(c.dataset.source == DatasetSource::kCsvFile
                                           ? "csv_file"
                                           : "synthetic_gaussian_mixture");
                  }},
      PMFL_INT_FIELD("dataset.num_classes", dataset.num_classes, std::size_t,
                     "number of classes"),
      PMFL_INT_FIELD("dataset.input_dim", dataset.input_dim, std::size_t,
                     "feature dimension"),
      PMFL_INT_FIELD("dataset.samples_per_class", dataset.samples_per_class, std::size_t,
                     "synthetic samples per class (train + test)"),
      PMFL_REAL_FIELD("dataset.test_fraction", dataset.test_fraction,
                      "fraction of each class held out for testing"),
      PMFL_REAL_FIELD("dataset.separation", dataset.separation,
                      "distance of class means from the origin"),
      PMFL_REAL_FIELD("dataset.noise", dataset.noise, "per-coordinate standard deviation"),
      ConfigField{"dataset.path", "CSV file for the csv_file source",
                  [](ExperimentConfig& c, const std::string& v) { c.dataset.path = trim(v); },
                  [](const ExperimentConfig& c) { return c.dataset.path; }},
      PMFL_BOOL_FIELD("dataset.standardize", dataset.standardize,
                      "standardize CSV features to zero mean / unit variance"),
      PMFL_INT_FIELD("dataset.seed", dataset.seed, std::uint64_t, "dataset generation seed"),
      PMFL_INT_FIELD("seed", seed, std::uint64_t, "root seed of the run"),
      PMFL_INT_FIELD("eval_every", eval_every, std::int64_t, "rounds between evaluations"),
      PMFL_BOOL_FIELD("eval_train", eval_train, "also evaluate on the training set"),
      PMFL_INT_FIELD("workers", workers, std::size_t, "parallel training threads"),
      PMFL_INT_FIELD("checkpoint_every", checkpoint_every, std::int64_t,
                     "rounds between checkpoints, 0 = only on interruption"),
      PMFL_INT_FIELD("stop_after", stop_after, std::int64_t,
                     "interrupt the run after this round (testing), -1 = never"),
  };
  for (auto& field : f) {
    if (field.name == "workers" || field.name == "checkpoint_every" ||
        field.name == "stop_after") {
      field.affects_results = false;
    }
  }
  return f;
}

#undef PMFL_INT_FIELD
#undef PMFL_REAL_FIELD
#undef PMFL_BOOL_FIELD
#undef PMFL_DIMS_FIELD

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "pmfl") return Variant::kPmfl;
  if (name == "wo_mct") return Variant::kWoMct;
  if (name == "wo_awc") return Variant::kWoAwc;
  if (name == "wo_hgm") return Variant::kWoHgm;
  if (name == "uniform_average") return Variant::kUniformAverage;
  if (name == "cached_update") return Variant::kCachedUpdate;
  throw ValidationError("unknown variant '" + std::string(name) + "'");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kPmfl:
      return "pmfl";
    case Variant::kWoMct:
      return "wo_mct";
    case Variant::kWoAwc:
      return "wo_awc";
    case Variant::kWoHgm:
      return "wo_hgm";
    case Variant::kUniformAverage:
      return "uniform_average";
    case Variant::kCachedUpdate:
      return "cached_update";
  }
  return "unknown";
}

ModelShape ExperimentConfig::model_shape() const {
  std::vector<std::size_t> classifier = classifier_hidden;
  classifier.push_back(dataset.num_classes);
  return ModelShape(dataset.input_dim, encoder_dims, projection_dims, classifier);
}

ExperimentConfig paper_profile() {
  ExperimentConfig cfg;
  cfg.num_nodes = 250;
  cfg.rounds = 10000;
  cfg.alpha = 0.1;
  cfg.beta = 0.1;
  cfg.target_frequency = 0.1;
  cfg.eta_local = 0.1;
  cfg.eta_global = 1.0;
  cfg.tau = 0.5;
  cfg.local_iterations = 5;
  cfg.lambda = 0.5;
  cfg.global_buffer = 3;
  cfg.local_buffer = 5;
  cfg.cutoff = 50;
  return cfg;
}

ExperimentConfig desk_profile() { return ExperimentConfig{}; }

ResolvedVariant resolve_variant(const ExperimentConfig& cfg) {
  using Agg = ResolvedVariant::Aggregator;
  ResolvedVariant r{cfg.lambda, cfg.local_buffer, cfg.global_buffer, true, Agg::kPmfl};
  switch (cfg.variant) {
    case Variant::kPmfl:
      break;
    case Variant::kWoMct:
      r.lambda = 0.0;
      r.local_buffer = 0;
      break;
    case Variant::kWoAwc:
      r.adaptive_weights = false;
      break;
    case Variant::kWoHgm:
      r.global_buffer = 0;
      r.aggregator = Agg::kAwcOnly;
      break;
    case Variant::kUniformAverage:
      r.lambda = 0.0;
      r.local_buffer = 0;
      r.global_buffer = 0;
      r.aggregator = Agg::kUniformAverage;
      break;
    case Variant::kCachedUpdate:
      r.lambda = 0.0;
      r.local_buffer = 0;
      r.global_buffer = 0;
      r.aggregator = Agg::kCachedUpdate;
      break;
  }
  return r;
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = build_fields();
  return fields;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  for (const auto& field : config_fields()) {
    if (field.name == key) {
      field.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown configuration key");
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  require(cfg.num_nodes >= 1, "num_nodes", "must be >= 1");
  require(cfg.rounds >= 0, "rounds", "must be >= 0");
  require(cfg.alpha > 0.0, "alpha", "must be > 0");
  require(cfg.beta > 0.0, "beta", "must be > 0");
  require(cfg.target_frequency > kMinParticipationFrequency && cfg.target_frequency <= 1.0,
          "target_frequency", "must lie in (0.02, 1]");
  require(cfg.p01 > 0.0 && cfg.p01 <= 1.0, "p01", "must lie in (0, 1]");
  require(cfg.cycle_length >= 1, "cycle_length", "must be >= 1");
  require(cfg.local_iterations >= 0, "local_iterations", "must be >= 0");
  require(cfg.eta_local > 0.0, "eta_local", "must be > 0");
  require(cfg.eta_global > 0.0, "eta_global", "must be > 0");
  require(cfg.tau > 0.0, "tau", "must be > 0");
  require(cfg.lambda >= 0.0, "lambda", "must be >= 0");
  require(cfg.cutoff >= 0, "cutoff", "must be >= 1 or inf");
  require(cfg.batch_size >= 1, "batch_size", "must be >= 1");
  require(!cfg.encoder_dims.empty(), "encoder_dims", "need at least one layer");
  require(!cfg.projection_dims.empty(), "projection_dims", "need at least one layer");
  require(cfg.eval_every >= 1, "eval_every", "must be >= 1");
  require(cfg.workers >= 1, "workers", "must be >= 1");
  require(cfg.checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
  const auto resolved = resolve_variant(cfg);
  require(!(resolved.global_buffer > 1 && cfg.rounds > 0 && cfg.rounds < 2), "rounds",
          "historical smoothing (global_buffer > 1) needs rounds >= 2");
  require(cfg.dataset.num_classes >= 2, "dataset.num_classes", "must be >= 2");
  require(cfg.dataset.input_dim >= 1, "dataset.input_dim", "must be >= 1");
  require(cfg.dataset.test_fraction >= 0.0 && cfg.dataset.test_fraction < 1.0,
          "dataset.test_fraction", "must lie in [0, 1)");
  require(cfg.dataset.noise >= 0.0, "dataset.noise", "must be >= 0");
  if (cfg.dataset.source == DatasetSource::kSyntheticGaussianMixture) {
    require(cfg.dataset.samples_per_class >= 1, "dataset.samples_per_class", "must be >= 1");
    require(cfg.dataset.input_dim >= cfg.dataset.num_classes, "dataset.input_dim",
            "synthetic mixture needs input_dim >= num_classes");
  } else {
    require(!cfg.dataset.path.empty(), "dataset.path", "required for csv_file");
  }
  for (std::size_t d : cfg.encoder_dims) require(d >= 1, "encoder_dims", "widths must be >= 1");
  for (std::size_t d : cfg.projection_dims) {
    require(d >= 1, "projection_dims", "widths must be >= 1");
  }
  for (std::size_t d : cfg.classifier_hidden) {
    require(d >= 1, "classifier_hidden", "widths must be >= 1");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    set_config_value(base, trim(std::string_view(stripped).substr(0, eq)),
                     trim(std::string_view(stripped).substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& field : config_fields()) out[field.name] = field.get(cfg);
  return out;
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& field : config_fields()) {
    out += "# " + field.help + "\n" + field.name + " = " + field.get(cfg) + "\n";
  }
  return out;
}

std::string result_fingerprint(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& field : config_fields()) {
    if (field.affects_results) out += field.name + "=" + field.get(cfg) + "\n";
  }
  return out;
}

}  // namespace pmfl
