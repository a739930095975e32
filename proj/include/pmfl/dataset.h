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

#ifndef PMFL_DATASET_H_
#define PMFL_DATASET_H_

#include <cstddef>
#include <span>
#include <vector>

namespace pmfl {

// Row-major labeled samples. Also serves as a minibatch.
struct Dataset {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // size() * input_dim
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }

  // Throws ValidationError on row-count mismatch, out-of-range labels or
  // (when require_nonempty) an empty set.
  void validate(bool require_nonempty = true) const;

  // Copies the listed rows, in order, into a new dataset.
  Dataset subset(std::span<const std::size_t> indices) const;

  void append(std::span<const double> x, int label);

  // Per-class sample counts.
  std::vector<std::size_t> class_counts() const;
};

using Minibatch = Dataset;

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

}  // namespace pmfl

#endif  // PMFL_DATASET_H_
