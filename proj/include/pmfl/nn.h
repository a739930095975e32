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

#ifndef PMFL_NN_H_
#define PMFL_NN_H_

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pmfl/dataset.h"
#include "pmfl/random.h"

namespace pmfl {

// The three disjoint parameter groups of a model.
enum class Partition { kEncoder = 0, kProjection = 1, kClassifier = 2 };

// Layer widths of an encoder -> projection -> classifier stack of dense
// layers. Each list holds the output width of every layer in that group; the
// last classifier width is the number of classes. A rectifier follows every
// layer except the final classifier layer.
class ModelShape {
 public:
  ModelShape() = default;
  ModelShape(std::size_t input_dim, std::vector<std::size_t> encoder,
             std::vector<std::size_t> projection,
             std::vector<std::size_t> classifier);

  std::size_t input_dim() const { return dims_.front(); }
  std::size_t num_classes() const { return dims_.back(); }
  std::size_t representation_dim() const { return dims_[representation_layer()]; }
  std::size_t num_layers() const { return dims_.size() - 1; }
  // Index into the activation list of the projection output.
  std::size_t representation_layer() const { return encoder_.size() + projection_.size(); }

  std::size_t layer_in(std::size_t layer) const { return dims_[layer]; }
  std::size_t layer_out(std::size_t layer) const { return dims_[layer + 1]; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + layer_in(layer) * layer_out(layer);
  }
  Partition partition_of(std::size_t layer) const;

  // Half-open [begin, end) range of the group inside the flat vector.
  std::pair<std::size_t, std::size_t> partition_range(Partition p) const;

  std::size_t num_params() const { return offsets_.back(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::size_t>& encoder() const { return encoder_; }
  const std::vector<std::size_t>& projection() const { return projection_; }
  const std::vector<std::size_t>& classifier() const { return classifier_; }

  bool operator==(const ModelShape& other) const = default;

 private:
  std::vector<std::size_t> encoder_;
  std::vector<std::size_t> projection_;
  std::vector<std::size_t> classifier_;
  std::vector<std::size_t> dims_;     // input, then one entry per layer
  std::vector<std::size_t> offsets_;  // per layer weight start, then total
};

// Model parameters stored as one contiguous flat vector. Layer i occupies a
// row-major (out x in) weight block followed by its bias.
class ModelParams {
 public:
  ModelParams() = default;

  static ModelParams zeros(const ModelShape& shape);
  // Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)); biases start at 0.
  static ModelParams glorot_uniform(const ModelShape& shape, Rng& rng);
  // Inverse of flatten(). Throws ShapeError on a size mismatch.
  static ModelParams from_flat(const ModelShape& shape, std::vector<double> values);

  const ModelShape& shape() const { return shape_; }
  std::span<const double> flat() const { return values_; }
  std::span<double> flat() { return values_; }
  std::vector<double> flatten() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> weights(std::size_t layer) const;
  std::span<double> weights(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);

  bool operator==(const ModelParams& other) const = default;

 private:
  ModelParams(ModelShape shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {}

  ModelShape shape_;
  std::vector<double> values_;
};

// Gradient of a scalar loss with respect to every parameter.
struct Gradient {
  ModelParams values;
  double loss = 0.0;
};

// activations[0] is the input; activations[i + 1] is the output of layer i
// after its activation.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;

  std::span<const double> logits() const { return activations.back(); }
};

ForwardTrace forward_trace(const ModelParams& params, std::span<const double> x);

// Projection-layer output z = Pro(Enc(x)).
std::vector<double> forward_representation(const ModelParams& params,
                                           std::span<const double> x);

// Pre-softmax class scores.
std::vector<double> forward_logits(const ModelParams& params,
                                   std::span<const double> x);

std::vector<double> softmax(std::span<const double> logits);

// Cross-entropy of softmax(logits) against `label`; writes dL/dlogits into
// `dlogits` when non-empty.
double softmax_cross_entropy(std::span<const double> logits, int label,
                             std::span<double> dlogits);

// Reverse pass. `dlogits` is the loss gradient at the classifier output and
// `drep` (may be empty) an extra gradient injected at the representation.
// Accumulates into `grad`, a flat vector of num_params entries.
void backward(const ModelParams& params, const ForwardTrace& trace,
              std::span<const double> dlogits, std::span<const double> drep,
              std::span<double> grad);

// Per-sample extra term evaluated on the representation z of row `sample`.
// Returns its loss and adds its gradient wrt z into `drep`.
using RepresentationTerm = std::function<double(
    std::size_t sample, std::span<const double> z, std::span<double> drep)>;

// Mean over the batch of cross-entropy (+ term, when given) and its gradient.
Gradient batch_loss_and_grad(const ModelParams& params, const Minibatch& batch,
                             const RepresentationTerm* term);

Gradient cross_entropy_and_grad(const ModelParams& params, const Minibatch& batch);

// params - eta * grad.
ModelParams sgd_step(const ModelParams& params, const Gradient& grad, double eta);

// Flat after - before.
std::vector<double> param_delta(const ModelParams& after, const ModelParams& before);

}  // namespace pmfl

#endif  // PMFL_NN_H_
