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

#ifndef PMFL_CONTRASTIVE_H_
#define PMFL_CONTRASTIVE_H_

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "pmfl/nn.h"

namespace pmfl {

using Vector = std::vector<double>;

// a.b / (|a||b|). A zero-norm argument yields 0 and a one-time warning.
// Throws ShapeError on a length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Fixed-capacity queue of model snapshots owned by one node. Pushing into a
// full buffer evicts the oldest snapshot. Capacity 0 stores nothing.
class LocalBuffer {
 public:
  explicit LocalBuffer(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(ModelParams snapshot);
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Oldest first.
  const std::deque<ModelParams>& entries() const { return entries_; }
  const ModelParams& newest() const { return entries_.back(); }
  void clear() { entries_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<ModelParams> entries_;
};

struct SamplePartition {
  std::vector<Vector> positives;
  std::vector<Vector> negatives;
};

// Historical representations with Sim(current, h) >= mu are positives, the
// rest negatives.
SamplePartition partition_samples(std::span<const double> current,
                                  std::span<const Vector> historical, double mu);

struct ContrastiveContext {
  Vector global_rep;
  std::vector<Vector> positives;
  std::vector<Vector> negatives;
  double mu = 1.0;
  double tau = 0.5;
  double lambda = 0.5;
};

// -log(pos / (pos + neg)) where pos sums exp(Sim/tau) over the global
// representation and the positives and neg over the negatives.
double contrastive_loss(std::span<const double> current, const ContrastiveContext& ctx);

// Loss as above plus its gradient with respect to `current`; the context
// vectors are constants.
double contrastive_loss_and_grad(std::span<const double> current,
                                 const ContrastiveContext& ctx,
                                 std::span<double> dcurrent);

// Selects the threshold mu for one sample. kReferenceModel compares the
// reference model's representation with the global one; kFixed uses `fixed`.
struct MuRule {
  enum class Kind { kReferenceModel, kFixed };
  Kind kind = Kind::kReferenceModel;
  double fixed = 1.0;
  const ModelParams* reference = nullptr;  // null: the global model itself

  static MuRule fixed_value(double mu) { return {Kind::kFixed, mu, nullptr}; }
  static MuRule from_reference(const ModelParams* model) {
    return {Kind::kReferenceModel, 1.0, model};
  }
};

// Newest buffered model, or null (meaning the global model) if empty.
const ModelParams* mu_reference(const LocalBuffer& buffer);

// Sim(Pro(Enc(x; reference)), Pro(Enc(x; global))). A null reference is
// the global model, giving exactly 1.
double compute_mu(const ModelParams* reference, const ModelParams& global_params,
                  std::span<const double> x);

struct ContrastiveSettings {
  double tau = 0.5;
  double lambda = 0.5;
};

// Batch mean of cross-entropy + lambda * contrastive loss. Historical and
// global representations are recomputed per sample and treated as
// constants. With lambda == 0 this is exactly cross_entropy_and_grad.
Gradient combined_loss_and_grad(const ModelParams& params, const Minibatch& batch,
                                const ModelParams& global_params,
                                const LocalBuffer& buffer,
                                const ContrastiveSettings& settings,
                                const MuRule& mu_rule);

}  // namespace pmfl

#endif  // PMFL_CONTRASTIVE_H_
