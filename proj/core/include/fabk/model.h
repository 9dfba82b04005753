// Copyright 2026 The fabk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef FABK_MODEL_H_
#define FABK_MODEL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "fabk/rng.h"
#include "fabk/vector.h"

namespace fabk {

struct Sample {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// hidden_dim == 0 selects multinomial logistic regression; otherwise a
// one-hidden-layer ReLU network.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
};

struct LossReport {
  double loss = 0.0;  // mean cross-entropy
  std::size_t correct_count = 0;
  std::size_t sample_count = 0;

  double accuracy() const {
    return sample_count == 0 ? 0.0
                             : static_cast<double>(correct_count) / sample_count;
  }
};

struct GradientResult {
  DenseVector gradient;
  LossReport report;
};

// Unflattened parameters of one affine layer: row-major out x in weights
// followed by out biases in the flat vector.
struct LayerParams {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  bool has_hidden_layer() const { return spec_.hidden_dim > 0; }
  // Total parameter count D.
  std::size_t dimension() const { return dimension_; }

  std::vector<LayerParams> unflatten(const DenseVector& w) const;
  DenseVector flatten(const std::vector<LayerParams>& layers) const;

  // Zeros for logistic regression; He-scaled Gaussian weights for the MLP.
  DenseVector initial_weights(Rng& rng) const;

  // Gradient of the mean cross-entropy over `batch`.
  GradientResult minibatch_gradient(const DenseVector& w,
                                    std::span<const Sample> batch) const;
  double sample_loss(const DenseVector& w, const Sample& sample) const;
  LossReport evaluate(const DenseVector& w, std::span<const Sample> samples) const;

 private:
  struct Layout {
    std::size_t in, out, weight_offset, bias_offset;
  };

  void check(const DenseVector& w, const Sample& s) const;
  // Logits for one sample; fills `hidden_pre` when the model has a hidden layer.
  void forward(std::span<const double> w, const Sample& s,
               std::vector<double>& hidden_pre, std::vector<double>& hidden,
               std::vector<double>& logits) const;

  ModelSpec spec_;
  std::vector<Layout> layout_;
  std::size_t dimension_ = 0;
};

GradientResult minibatch_gradient(const Model& model, const DenseVector& w,
                                  std::span<const Sample> batch);
double sample_loss(const Model& model, const DenseVector& w, const Sample& sample);

}  // namespace fabk

#endif  // FABK_MODEL_H_
