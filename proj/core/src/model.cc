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

#include "fabk/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fabk/error.h"

namespace fabk {
namespace {

// Returns log-sum-exp(z) - z[label] and overwrites z with softmax(z).
double softmax_cross_entropy(std::vector<double>& z, int label) {
  const double zmax = *std::max_element(z.begin(), z.end());
  const double z_label = z[label];
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  const double loss = std::log(sum) - (z_label - zmax);
  for (double& v : z) v /= sum;
  return loss;
}

int argmax(const std::vector<double>& z) {
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace

Model::Model(ModelSpec spec) : spec_(spec) {
  FABK_REQUIRE(spec.input_dim > 0, "model input_dim must be positive");
  FABK_REQUIRE(spec.num_classes >= 2, "model needs at least two classes");
  std::vector<std::size_t> widths{spec.input_dim};
  if (spec.hidden_dim > 0) widths.push_back(spec.hidden_dim);
  widths.push_back(spec.num_classes);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layout layer{widths[l], widths[l + 1], offset, offset + widths[l] * widths[l + 1]};
    offset = layer.bias_offset + layer.out;
    layout_.push_back(layer);
  }
  dimension_ = offset;
}

std::vector<LayerParams> Model::unflatten(const DenseVector& w) const {
  FABK_REQUIRE(w.size() == dimension_, "weight vector has wrong dimension");
  std::vector<LayerParams> layers;
  const auto v = w.view();
  for (const auto& l : layout_) {
    LayerParams p{l.in, l.out, {}, {}};
    p.weights.assign(v.begin() + l.weight_offset, v.begin() + l.bias_offset);
    p.bias.assign(v.begin() + l.bias_offset, v.begin() + l.bias_offset + l.out);
    layers.push_back(std::move(p));
  }
  return layers;
}

DenseVector Model::flatten(const std::vector<LayerParams>& layers) const {
  FABK_REQUIRE(layers.size() == layout_.size(), "layer count mismatch");
  std::vector<double> flat;
  flat.reserve(dimension_);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    FABK_REQUIRE(p.in == layout_[l].in && p.out == layout_[l].out &&
                     p.weights.size() == p.in * p.out && p.bias.size() == p.out,
                 "layer shape mismatch");
    flat.insert(flat.end(), p.weights.begin(), p.weights.end());
    flat.insert(flat.end(), p.bias.begin(), p.bias.end());
  }
  return DenseVector(std::move(flat));
}

DenseVector Model::initial_weights(Rng& rng) const {
  DenseVector w(dimension_);
  if (!has_hidden_layer()) return w;
  for (const auto& l : layout_) {
    const double scale = std::sqrt(2.0 / static_cast<double>(l.in));
    for (std::size_t j = l.weight_offset; j < l.bias_offset; ++j) w[j] = scale * rng.normal();
  }
  return w;
}

void Model::check(const DenseVector& w, const Sample& s) const {
  FABK_REQUIRE(w.size() == dimension_,
               "weight dimension " + std::to_string(w.size()) + " != model dimension " +
                   std::to_string(dimension_));
  FABK_REQUIRE(s.features.size() == spec_.input_dim,
               "sample has " + std::to_string(s.features.size()) +
                   " features, model expects " + std::to_string(spec_.input_dim));
  FABK_REQUIRE(s.label >= 0 && static_cast<std::size_t>(s.label) < spec_.num_classes,
               "sample label out of range");
}

void Model::forward(std::span<const double> w, const Sample& s,
                    std::vector<double>& hidden_pre, std::vector<double>& hidden,
                    std::vector<double>& logits) const {
  std::span<const double> input = s.features;
  for (std::size_t li = 0; li < layout_.size(); ++li) {
    const auto& l = layout_[li];
    const bool last = li + 1 == layout_.size();
    std::vector<double>& out = last ? logits : hidden_pre;
    out.assign(l.out, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
      const double* row = w.data() + l.weight_offset + r * l.in;
      double acc = w[l.bias_offset + r];
      for (std::size_t c = 0; c < l.in; ++c) acc += row[c] * input[c];
      out[r] = acc;
    }
    if (!last) {
      hidden.resize(l.out);
      for (std::size_t r = 0; r < l.out; ++r) hidden[r] = hidden_pre[r] > 0.0 ? hidden_pre[r] : 0.0;
      input = hidden;
    }
  }
}

GradientResult Model::minibatch_gradient(const DenseVector& w,
                                         std::span<const Sample> batch) const {
  FABK_REQUIRE(!batch.empty(), "minibatch must be nonempty");
  GradientResult result{DenseVector(dimension_), {}};
  auto g = result.gradient.mutable_view();
  const auto wv = w.view();
  std::vector<double> hidden_pre, hidden, logits, grad_hidden;
  double loss_sum = 0.0;
  for (const Sample& s : batch) {
    check(w, s);
    forward(wv, s, hidden_pre, hidden, logits);
    if (argmax(logits) == s.label) ++result.report.correct_count;
    loss_sum += softmax_cross_entropy(logits, s.label);
    logits[s.label] -= 1.0;  // d loss / d logits

    // Backpropagate from the output layer down.
    std::span<const double> delta = logits;
    for (std::size_t li = layout_.size(); li-- > 0;) {
      const auto& l = layout_[li];
      std::span<const double> input = li == 0 ? std::span<const double>(s.features)
                                              : std::span<const double>(hidden);
      for (std::size_t r = 0; r < l.out; ++r) {
        const double d = delta[r];
        g[l.bias_offset + r] += d;
        if (d == 0.0) continue;
        double* grow = g.data() + l.weight_offset + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) grow[c] += d * input[c];
      }
      if (li == 0) break;
      grad_hidden.assign(l.in, 0.0);
      for (std::size_t r = 0; r < l.out; ++r) {
        const double* row = wv.data() + l.weight_offset + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) grad_hidden[c] += row[c] * delta[r];
      }
      // ReLU subgradient at exactly 0 is taken as 0.
      for (std::size_t c = 0; c < l.in; ++c)
        if (!(hidden_pre[c] > 0.0)) grad_hidden[c] = 0.0;
      delta = grad_hidden;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& x : g) x *= inv;
  result.report.loss = loss_sum * inv;
  result.report.sample_count = batch.size();
  return result;
}

double Model::sample_loss(const DenseVector& w, const Sample& sample) const {
  check(w, sample);
  std::vector<double> hidden_pre, hidden, logits;
  forward(w.view(), sample, hidden_pre, hidden, logits);
  return softmax_cross_entropy(logits, sample.label);
}

LossReport Model::evaluate(const DenseVector& w, std::span<const Sample> samples) const {
  LossReport report;
  std::vector<double> hidden_pre, hidden, logits;
  double loss_sum = 0.0;
  for (const Sample& s : samples) {
    check(w, s);
    forward(w.view(), s, hidden_pre, hidden, logits);
    if (argmax(logits) == s.label) ++report.correct_count;
    loss_sum += softmax_cross_entropy(logits, s.label);
  }
  report.sample_count = samples.size();
  if (!samples.empty()) report.loss = loss_sum / static_cast<double>(samples.size());
  return report;
}

GradientResult minibatch_gradient(const Model& model, const DenseVector& w,
                                  std::span<const Sample> batch) {
  return model.minibatch_gradient(w, batch);
}

double sample_loss(const Model& model, const DenseVector& w, const Sample& sample) {
  return model.sample_loss(w, sample);
}

}  // namespace fabk
