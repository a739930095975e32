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

#include "pmfl/dataset.h"

#include <string>

#include "pmfl/common.h"

namespace pmfl {

void Dataset::validate(bool require_nonempty) const {
  if (require_nonempty && labels.empty()) {
    throw ValidationError("dataset is empty");
  }
  if (features.size() != labels.size() * input_dim) {
    throw ValidationError("feature matrix has " +
                          std::to_string(features.size()) + " values, expected " +
                          std::to_string(labels.size() * input_dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.input_dim = input_dim;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * input_dim);
  out.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto r = row(idx);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[idx]);
  }
  return out;
}

void Dataset::append(std::span<const double> x, int label) {
  if (x.size() != input_dim) {
    throw ShapeError("sample has " + std::to_string(x.size()) +
                     " features, dataset expects " + std::to_string(input_dim));
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) {
    if (y >= 0 && static_cast<std::size_t>(y) < num_classes) ++counts[y];
  }
  return counts;
}

}  // namespace pmfl
