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

#ifndef PMFL_METRICS_H_
#define PMFL_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmfl/dataset.h"
#include "pmfl/nn.h"

namespace pmfl {

// Sum over participants of 1 - Sim(delta_k, mean delta). Returns 0 (with a
// warning) when the mean update is the zero vector. Throws ValidationError
// when no updates are given.
double deviation(std::span<const std::vector<double>> updates);

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

// Argmax accuracy and mean softmax cross-entropy over a nonempty dataset.
Evaluation evaluate(const ModelParams& params, const Dataset& dataset);

// Mean of the five largest entries; with fewer than five, the mean of all
// (logged).
double top5_mean(std::span<const double> series);

// Empirical CDF points (value, fraction of entries <= value), one per
// distinct value, ascending.
std::vector<std::pair<double, double>> node_cdf(std::span<const double> values);

// One simulated round. Accuracy/loss fields are only set on evaluated rounds.
struct RoundMetrics {
  std::int64_t round = 0;
  std::size_t participants = 0;
  std::optional<double> deviation;
  double psi = 0.0;
  std::vector<double> weights;
  std::optional<Evaluation> train;
  std::optional<Evaluation> test;

  bool evaluated() const { return test.has_value(); }
};

// round,participants,deviation,psi,train_accuracy,train_loss,test_accuracy,test_loss
// for every evaluated round.
std::string metrics_csv(std::span<const RoundMetrics> rounds);

// round,psi,x_0..x_{K-1}, one row per round.
std::string weights_csv(std::span<const RoundMetrics> rounds);

// round,participants,deviation, one row per round (empty deviation when no
// node trained).
std::string deviation_csv(std::span<const RoundMetrics> rounds);

// metric,value,cumulative_fraction for each named per-node series.
std::string cdf_csv(std::span<const std::pair<std::string, std::vector<double>>> series);

// Formats a double so that parsing it back yields the same bits.
std::string format_double(double v);

}  // namespace pmfl

#endif  // PMFL_METRICS_H_
