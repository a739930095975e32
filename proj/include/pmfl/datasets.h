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

#ifndef PMFL_DATASETS_H_
#define PMFL_DATASETS_H_

#include <cstddef>
#include <optional>
#include <string>

#include "pmfl/config.h"
#include "pmfl/dataset.h"

namespace pmfl {

// Gaussian mixture with one isotropic component per class centred at
// separation * e_c. Every class contributes exactly samples_per_class
// samples, round(samples_per_class * test_fraction) of which go to test.
TrainTestSplit synth_dataset(const DatasetSpec& spec);

struct CsvSchema {
  // Number of classes; when unset it is max(label) + 1.
  std::optional<std::size_t> num_classes;
  bool standardize = false;
};

// Rows are "f_1,...,f_d,label". Blank lines and lines starting with '#' are
// skipped. Throws ValidationError naming the line on malformed input.
Dataset ingest_csv(const std::string& path, const CsvSchema& schema = {});
Dataset parse_csv(const std::string& text, const CsvSchema& schema = {});

// Writes the format read by parse_csv with round-trip exact numbers.
std::string export_csv(const Dataset& dataset);

// Builds train/test data from a DatasetSpec: synthetic, or CSV split per class with
// a seeded shuffle.
TrainTestSplit load_dataset(const DatasetSpec& spec);

}  // namespace pmfl

#endif  // PMFL_DATASETS_H_
