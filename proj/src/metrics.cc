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

#include "pmfl/metrics.h"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <functional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pmfl/common.h"
#include "pmfl/contrastive.h"

namespace pmfl {

double deviation(std::span<const std::vector<double>> updates) {
  if (updates.empty()) throw ValidationError("deviation needs at least one update");
  const std::size_t dim = updates.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& u : updates) {
    if (u.size() != dim) throw ShapeError("updates have different lengths");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += u[i];
  }
  const double inv = 1.0 / static_cast<double>(updates.size());
  bool all_zero = true;
  for (double& m : mean) {
    m *= inv;
    all_zero = all_zero && m == 0.0;
  }
  if (all_zero) {
    spdlog::warn("mean update is the zero vector; deviation set to 0");
    return 0.0;
  }
  double dev = 0.0;
  for (const auto& u : updates) dev += 1.0 - cosine_similarity(u, mean);
  return dev;
}

Evaluation evaluate(const ModelParams& params, const Dataset& dataset) {
  if (dataset.empty()) throw ValidationError("cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::vector<double> logits = forward_logits(params, dataset.row(i));
    const auto best = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == dataset.labels[i]) ++correct;
    loss += softmax_cross_entropy(logits, dataset.labels[i], {});
  }
  const auto n = static_cast<double>(dataset.size());
  return {static_cast<double>(correct) / n, loss / n};
}

double top5_mean(std::span<const double> series) {
  if (series.empty()) throw ValidationError("top-5 mean of an empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::size_t take = 5;
  if (sorted.size() < take) {
    spdlog::warn("top-5 mean over only {} values", sorted.size());
    take = sorted.size();
  }
  double total = 0.0;
  for (std::size_t i = 0; i < take; ++i) total += sorted[i];
  return total / static_cast<double>(take);
}

std::vector<std::pair<double, double>> node_cdf(std::span<const double> values) {
  if (values.empty()) throw ValidationError("CDF of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string metrics_csv(std::span<const RoundMetrics> rounds) {
  std::ostringstream os;
  os << "round,participants,deviation,psi,train_accuracy,train_loss,test_accuracy,test_loss\n";
  for (const auto& r : rounds) {
    if (!r.evaluated()) continue;
    os << r.round << ',' << r.participants << ','
       << (r.deviation ? format_double(*r.deviation) : "") << ',' << format_double(r.psi)
       << ',' << (r.train ? format_double(r.train->accuracy) : "") << ','
       << (r.train ? format_double(r.train->loss) : "") << ','
       << format_double(r.test->accuracy) << ',' << format_double(r.test->loss) << '\n';
  }
  return os.str();
}

std::string weights_csv(std::span<const RoundMetrics> rounds) {
  std::ostringstream os;
  const std::size_t k = rounds.empty() ? 0 : rounds.front().weights.size();
  os << "round,psi";
  for (std::size_t i = 0; i < k; ++i) os << ",x_" << i;
  os << '\n';
  for (const auto& r : rounds) {
    os << r.round << ',' << format_double(r.psi);
    for (double x : r.weights) os << ',' << format_double(x);
    os << '\n';
  }
  return os.str();
}

std::string deviation_csv(std::span<const RoundMetrics> rounds) {
  std::ostringstream os;
  os << "round,participants,deviation\n";
  for (const auto& r : rounds) {
    os << r.round << ',' << r.participants << ','
       << (r.deviation ? format_double(*r.deviation) : "") << '\n';
  }
  return os.str();
}

std::string cdf_csv(std::span<const std::pair<std::string, std::vector<double>>> series) {
  std::ostringstream os;
  os << "metric,value,cumulative_fraction\n";
  for (const auto& [name, values] : series) {
    if (values.empty()) continue;
    for (const auto& [v, f] : node_cdf(values)) {
      os << name << ',' << format_double(v) << ',' << format_double(f) << '\n';
    }
  }
  return os.str();
}

}  // namespace pmfl
