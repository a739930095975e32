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

#include "pmfl/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmfl/common.h"

namespace pmfl {
namespace {

std::string dim_string(std::size_t got, std::size_t want) {
  return "got " + std::to_string(got) + ", expected " + std::to_string(want);
}

void require_same_shape(const ModelParams& a, const ModelParams& b,
                        const char* what) {
  if (!(a.shape() == b.shape()) || a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": parameter shapes differ");
  }
}

}  // namespace

ModelShape::ModelShape(std::size_t input_dim, std::vector<std::size_t> encoder,
                       std::vector<std::size_t> projection,
                       std::vector<std::size_t> classifier)
    : encoder_(std::move(encoder)),
      projection_(std::move(projection)),
      classifier_(std::move(classifier)) {
  if (input_dim == 0) throw ShapeError("input dimension must be positive");
  if (encoder_.empty() || projection_.empty() || classifier_.empty()) {
    throw ShapeError("encoder, projection and classifier need >= 1 layer each");
  }
  dims_.push_back(input_dim);
  for (const auto* group : {&encoder_, &projection_, &classifier_}) {
    for (std::size_t width : *group) {
      if (width == 0) throw ShapeError("layer width must be positive");
      dims_.push_back(width);
    }
  }
  offsets_.push_back(0);
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    offsets_.push_back(offsets_.back() + dims_[i] * dims_[i + 1] + dims_[i + 1]);
  }
}

Partition ModelShape::partition_of(std::size_t layer) const {
  if (layer < encoder_.size()) return Partition::kEncoder;
  if (layer < encoder_.size() + projection_.size()) return Partition::kProjection;
  return Partition::kClassifier;
}

std::pair<std::size_t, std::size_t> ModelShape::partition_range(Partition p) const {
  const std::size_t enc = encoder_.size();
  const std::size_t pro = enc + projection_.size();
  switch (p) {
    case Partition::kEncoder:
      return {offsets_[0], offsets_[enc]};
    case Partition::kProjection:
      return {offsets_[enc], offsets_[pro]};
    case Partition::kClassifier:
      return {offsets_[pro], offsets_.back()};
  }
  return {0, 0};
}

ModelParams ModelParams::zeros(const ModelShape& shape) {
  return ModelParams(shape, std::vector<double>(shape.num_params(), 0.0));
}

ModelParams ModelParams::glorot_uniform(const ModelShape& shape, Rng& rng) {
  ModelParams p = zeros(shape);
  for (std::size_t layer = 0; layer < shape.num_layers(); ++layer) {
    const double fan = static_cast<double>(shape.layer_in(layer) + shape.layer_out(layer));
    const double s = std::sqrt(6.0 / fan);
    for (double& w : p.weights(layer)) w = (2.0 * uniform01(rng) - 1.0) * s;
  }
  return p;
}

ModelParams ModelParams::from_flat(const ModelShape& shape, std::vector<double> values) {
  if (values.size() != shape.num_params()) {
    throw ShapeError("flat parameter vector: " +
                     dim_string(values.size(), shape.num_params()));
  }
  return ModelParams(shape, std::move(values));
}

std::span<const double> ModelParams::weights(std::size_t layer) const {
  return std::span<const double>(values_).subspan(
      shape_.weight_offset(layer), shape_.layer_in(layer) * shape_.layer_out(layer));
}

std::span<double> ModelParams::weights(std::size_t layer) {
  return std::span<double>(values_).subspan(
      shape_.weight_offset(layer), shape_.layer_in(layer) * shape_.layer_out(layer));
}

std::span<const double> ModelParams::bias(std::size_t layer) const {
  return std::span<const double>(values_).subspan(shape_.bias_offset(layer),
                                                  shape_.layer_out(layer));
}

std::span<double> ModelParams::bias(std::size_t layer) {
  return std::span<double>(values_).subspan(shape_.bias_offset(layer),
                                            shape_.layer_out(layer));
}

ForwardTrace forward_trace(const ModelParams& params, std::span<const double> x) {
  const ModelShape& shape = params.shape();
  if (x.size() != shape.input_dim()) {
    throw ShapeError("input vector: " + dim_string(x.size(), shape.input_dim()));
  }
  ForwardTrace trace;
  trace.activations.reserve(shape.num_layers() + 1);
  trace.activations.emplace_back(x.begin(), x.end());
  const std::size_t last = shape.num_layers() - 1;
  for (std::size_t layer = 0; layer <= last; ++layer) {
    const std::size_t in = shape.layer_in(layer);
    const std::size_t out = shape.layer_out(layer);
    const auto w = params.weights(layer);
    const auto b = params.bias(layer);
    const std::vector<double>& a = trace.activations.back();
    std::vector<double> h(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * a[i];
      h[o] = (layer == last) ? acc : std::max(acc, 0.0);
    }
    trace.activations.push_back(std::move(h));
  }
  return trace;
}

std::vector<double> forward_representation(const ModelParams& params,
                                           std::span<const double> x) {
  // Only the encoder and projection layers are needed.
  const ModelShape& shape = params.shape();
  if (x.size() != shape.input_dim()) {
    throw ShapeError("input vector: " + dim_string(x.size(), shape.input_dim()));
  }
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t layer = 0; layer < shape.representation_layer(); ++layer) {
    const std::size_t in = shape.layer_in(layer);
    const std::size_t out = shape.layer_out(layer);
    const auto w = params.weights(layer);
    const auto b = params.bias(layer);
    std::vector<double> h(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * a[i];
      h[o] = std::max(acc, 0.0);
    }
    a = std::move(h);
  }
  return a;
}

std::vector<double> forward_logits(const ModelParams& params,
                                   std::span<const double> x) {
  return std::move(forward_trace(params, x).activations.back());
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double softmax_cross_entropy(std::span<const double> logits, int label,
                             std::span<double> dlogits) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(logits.size()) + ")");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - m);
  const double log_z = m + std::log(total);
  if (!dlogits.empty()) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      dlogits[i] = std::exp(logits[i] - log_z);
    }
    dlogits[label] -= 1.0;
  }
  return log_z - logits[label];
}

void backward(const ModelParams& params, const ForwardTrace& trace,
              std::span<const double> dlogits, std::span<const double> drep,
              std::span<double> grad) {
  const ModelShape& shape = params.shape();
  if (grad.size() != shape.num_params()) {
    throw ShapeError("gradient buffer: " + dim_string(grad.size(), shape.num_params()));
  }
  if (dlogits.size() != shape.num_classes()) {
    throw ShapeError("logit gradient: " + dim_string(dlogits.size(), shape.num_classes()));
  }
  if (!drep.empty() && drep.size() != shape.representation_dim()) {
    throw ShapeError("representation gradient: " +
                     dim_string(drep.size(), shape.representation_dim()));
  }
  const std::size_t last = shape.num_layers() - 1;
  const std::size_t rep_layer = shape.representation_layer();

  // delta holds dL/d(post-activation output) of the current layer.
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  for (std::size_t layer = last + 1; layer-- > 0;) {
    const std::size_t in = shape.layer_in(layer);
    const std::size_t out = shape.layer_out(layer);
    const std::vector<double>& h = trace.activations[layer + 1];
    const std::vector<double>& a = trace.activations[layer];
    if (layer + 1 == rep_layer && !drep.empty()) {
      for (std::size_t o = 0; o < out; ++o) delta[o] += drep[o];
    }
    if (layer != last) {
      for (std::size_t o = 0; o < out; ++o) {
        if (h[o] <= 0.0) delta[o] = 0.0;
      }
    }
    const auto w = params.weights(layer);
    double* gw = grad.data() + shape.weight_offset(layer);
    double* gb = grad.data() + shape.bias_offset(layer);
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + o * in;
      const double* wrow = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += d * a[i];
        prev[i] += d * wrow[i];
      }
    }
    delta = std::move(prev);
  }
}

Gradient batch_loss_and_grad(const ModelParams& params, const Minibatch& batch,
                             const RepresentationTerm* term) {
  const ModelShape& shape = params.shape();
  if (batch.input_dim != shape.input_dim()) {
    throw ShapeError("batch features: " + dim_string(batch.input_dim, shape.input_dim()));
  }
  batch.validate();
  if (batch.num_classes > shape.num_classes()) {
    throw ValidationError("batch has more classes than the classifier outputs");
  }

  Gradient out{ModelParams::zeros(shape), 0.0};
  std::span<double> grad = out.values.flat();
  std::vector<double> dlogits(shape.num_classes());
  std::vector<double> drep;
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const ForwardTrace trace = forward_trace(params, batch.row(s));
    total += softmax_cross_entropy(trace.logits(), batch.labels[s], dlogits);
    if (term != nullptr) {
      drep.assign(shape.representation_dim(), 0.0);
      total += (*term)(s, trace.activations[shape.representation_layer()], drep);
      backward(params, trace, dlogits, drep, grad);
    } else {
      backward(params, trace, dlogits, {}, grad);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  out.loss = total * inv;
  return out;
}

Gradient cross_entropy_and_grad(const ModelParams& params, const Minibatch& batch) {
  return batch_loss_and_grad(params, batch, nullptr);
}

ModelParams sgd_step(const ModelParams& params, const Gradient& grad, double eta) {
  require_same_shape(params, grad.values, "sgd_step");
  if (!(eta > 0.0)) throw ValidationError("learning rate must be positive");
  std::vector<double> next = params.flatten();
  const auto g = grad.values.flat();
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= eta * g[i];
  return ModelParams::from_flat(params.shape(), std::move(next));
}

std::vector<double> param_delta(const ModelParams& after, const ModelParams& before) {
  require_same_shape(after, before, "param_delta");
  const auto a = after.flat();
  const auto b = before.flat();
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace pmfl
