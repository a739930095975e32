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

#include "pmfl/datasets.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pmfl/common.h"
#include "pmfl/metrics.h"
#include "pmfl/random.h"

namespace pmfl {
namespace {

// Box-Muller on uniform01 so samples do not depend on the standard library.
double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void standardize_features(Dataset& data) {
  const std::size_t d = data.input_dim;
  const auto n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) mean += data.features[i * d + j];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double c = data.features[i * d + j] - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / n);
    for (std::size_t i = 0; i < data.size(); ++i) {
      double& v = data.features[i * d + j];
      v = sd > 0.0 ? (v - mean) / sd : 0.0;
    }
  }
}

}  // namespace

TrainTestSplit synth_dataset(const DatasetSpec& spec) {
  if (spec.input_dim < spec.num_classes) {
    throw ValidationError("synthetic mixture needs input_dim >= num_classes");
  }
  Rng rng = make_rng(spec.seed, streams::kDataset);
  TrainTestSplit out;
  for (Dataset* d : {&out.train, &out.test}) {
    d->input_dim = spec.input_dim;
    d->num_classes = spec.num_classes;
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.samples_per_class) * spec.test_fraction));
  std::vector<double> x(spec.input_dim);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
      for (std::size_t j = 0; j < spec.input_dim; ++j) {
        const double mean = (j == c) ? spec.separation : 0.0;
        x[j] = mean + spec.noise * standard_normal(rng);
      }
      (i < n_test ? out.test : out.train).append(x, static_cast<int>(c));
    }
  }
  return out;
}

Dataset parse_csv(const std::string& text, const CsvSchema& schema) {
  Dataset data;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  int max_label = -1;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(lineno) + ": cannot parse '" +
                              cell + "' as a number");
      }
    }
    if (row.size() < 2) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": need at least one feature and a label");
    }
    const double label = row.back();
    row.pop_back();
    if (label != std::floor(label) || label < 0.0) {
      throw ValidationError("line " + std::to_string(lineno) + ": label '" +
                            format_double(label) + "' is not a non-negative integer");
    }
    if (data.input_dim == 0) data.input_dim = row.size();
    if (row.size() != data.input_dim) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(data.input_dim) + " features, found " +
                            std::to_string(row.size()));
    }
    const int y = static_cast<int>(label);
    if (schema.num_classes && static_cast<std::size_t>(y) >= *schema.num_classes) {
      throw ValidationError("line " + std::to_string(lineno) + ": label " +
                            std::to_string(y) + " outside [0, " +
                            std::to_string(*schema.num_classes) + ")");
    }
    max_label = std::max(max_label, y);
    data.features.insert(data.features.end(), row.begin(), row.end());
    data.labels.push_back(y);
  }
  if (data.empty()) throw ValidationError("CSV input contains no samples");
  data.num_classes = schema.num_classes ? *schema.num_classes
                                        : static_cast<std::size_t>(max_label + 1);
  if (schema.standardize) standardize_features(data);
  data.validate();
  return data;
}

Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string export_csv(const Dataset& dataset) {
  std::string out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.row(i)) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(dataset.labels[i]);
    out += '\n';
  }
  return out;
}

TrainTestSplit load_dataset(const DatasetSpec& spec) {
  if (spec.source == DatasetSource::kSyntheticGaussianMixture) return synth_dataset(spec);

  CsvSchema schema;
  schema.num_classes = spec.num_classes;
  schema.standardize = spec.standardize;
  const Dataset all = ingest_csv(spec.path, schema);
  if (all.input_dim != spec.input_dim) {
    throw ConfigError("dataset.input_dim", "CSV has " + std::to_string(all.input_dim) +
                                               " features, config says " +
                                               std::to_string(spec.input_dim));
  }
  std::vector<std::vector<std::size_t>> by_class(all.num_classes);
  for (std::size_t i = 0; i < all.size(); ++i) by_class[all.labels[i]].push_back(i);
  Rng rng = make_rng(spec.seed, streams::kDataset);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (auto& members : by_class) {
    shuffle(std::span<std::size_t>(members), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * spec.test_fraction));
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + n_test);
    train_idx.insert(train_idx.end(), members.begin() + n_test, members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {all.subset(train_idx), all.subset(test_idx)};
}

}  // namespace pmfl
