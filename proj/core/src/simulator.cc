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

#include "fabk/simulator.h"

#include <algorithm>
#include <cmath>

#include "fabk/config.h"
#include "fabk/error.h"
#include "fabk/parallel.h"
#include "fabk/probe.h"

namespace fabk {

LoadedData load_data(const ExperimentConfig& cfg) {
  if (cfg.dataset.kind == DatasetConfig::Kind::kSynthetic) {
    const auto& spec = cfg.dataset.synth;
    const auto samples = synth_classification(cfg.seed, spec);
    LoadedData data{partition_one_class_per_client(samples, cfg.clients, cfg.seed),
                    synth_holdout(cfg.seed, spec, cfg.dataset.test_samples_per_class),
                    ModelSpec{spec.dim, cfg.hidden_dim, spec.num_classes}};
    return data;
  }
  LoadedData data{partition_by_writer_csv(cfg.dataset.csv_path), {}, {}};
  if (!cfg.dataset.test_csv_path.empty())
    data.test = partition_by_writer_csv(cfg.dataset.test_csv_path).all_samples();
  else
    data.test = data.train.all_samples();
  std::size_t classes = data.train.num_classes();
  for (const auto& s : data.test) {
    if (s.features.size() != data.train.feature_dim())
      throw InputError("test set feature dimension differs from training set");
    classes = std::max(classes, static_cast<std::size_t>(s.label) + 1);
  }
  data.model = ModelSpec{data.train.feature_dim(), cfg.hidden_dim, std::max<std::size_t>(classes, 2)};
  return data;
}

ControllerSettings resolve_controller(const ExperimentConfig& cfg, std::size_t dim) {
  const auto d = static_cast<double>(dim);
  const auto& cc = cfg.controller;
  ControllerSettings s;
  s.kind = cc.kind;
  s.k_min = cc.k_min.value_or(std::max(1.0, 0.002 * d));
  s.k_max = cc.k_max.value_or(d);
  s.varying = cc.varying;
  s.exp3 = cc.exp3;
  s.exp3_cost_scale = cc.exp3_cost_scale;
  switch (cc.kind) {
    case ControllerKind::kFixed:
      s.k_initial = cfg.strategy.kind == StrategyKind::kSendAll && !cfg.strategy_k_set
                        ? d
                        : cfg.strategy.k;
      if (s.k_initial > d)
        throw InputError("'strategy.k' = " + std::to_string(s.k_initial) +
                         " exceeds the model dimension " + std::to_string(dim));
      break;
    case ControllerKind::kReplay:
      s.replay = cc.replay.empty() ? read_k_sequence(cc.replay_from) : cc.replay;
      for (double k : s.replay)
        if (!(k >= 1.0 && k <= d)) throw InputError("replayed k outside [1, D]");
      break;
    default:
      if (!(s.k_min >= 1.0 && s.k_min < s.k_max && s.k_max <= d))
        throw InputError("controller interval must satisfy 1 <= k_min < k_max <= D (D = " +
                         std::to_string(dim) + ")");
      s.k_initial = cc.k_initial.value_or(0.5 * (s.k_min + s.k_max));
      break;
  }
  return s;
}

Simulator::Simulator(const ExperimentConfig& cfg) : Simulator(cfg, load_data(cfg)) {}

Simulator::Simulator(const ExperimentConfig& cfg, LoadedData data)
    : cfg_(cfg), data_(std::move(data)), model_(data_.model) {
  counts_ = data_.train.counts();
  all_train_ = data_.train.all_samples();
  for (const auto& s : all_train_)
    FABK_REQUIRE(s.features.size() == model_.spec().input_dim, "dataset/model dimension mismatch");
  Rng init = Rng::derive(cfg_.seed, {tag(Stream::kInit)});
  const DenseVector w0 = model_.initial_weights(init);
  clients_.reserve(data_.train.num_clients());
  for (std::size_t i = 0; i < data_.train.num_clients(); ++i)
    clients_.push_back(ClientState{w0, DenseVector(model_.dimension()), data_.train.shard(i), counts_[i]});
  controller_ = make_controller(resolve_controller(cfg_, model_.dimension()),
                                Rng::derive(cfg_.seed, {tag(Stream::kController)}));
  initial_loss_ = global_loss();
}

void Simulator::replace_controller(std::unique_ptr<KController> controller) {
  FABK_REQUIRE(controller != nullptr, "controller must not be null");
  controller_ = std::move(controller);
}

DenseVector Simulator::global_weights() const {
  if (cfg_.strategy.kind != StrategyKind::kFedAvg) return clients_.front().weights;
  double c_total = 0.0;
  DenseVector avg(model_.dimension());
  for (std::size_t i = 0; i < clients_.size(); ++i) {
    c_total += counts_[i];
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += counts_[i] * clients_[i].weights[j];
  }
  for (std::size_t j = 0; j < avg.size(); ++j) avg[j] /= c_total;
  return avg;
}

double Simulator::global_loss() const { return model_.evaluate(global_weights(), all_train_).loss; }

LossReport Simulator::evaluate_test() const { return model_.evaluate(global_weights(), data_.test); }

RoundRecord Simulator::step() {
  const std::size_t m = ++round_;
  const std::size_t dim = model_.dimension();
  const auto d = static_cast<double>(dim);
  const std::size_t n = clients_.size();

  RoundRecord rec;
  rec.m = m;
  rec.k = std::clamp(controller_->current_k(), 1.0, d);
  Rng rounding = Rng::derive(cfg_.seed, {tag(Stream::kRounding), m});
  rec.k_used = cfg_.strategy.kind == StrategyKind::kSendAll ? dim : stochastic_round(rec.k, dim, rounding);

  const DenseVector w_prev = clients_.front().weights;
  std::vector<std::vector<Sample>> batches(n);
  parallel_for(n, cfg_.threads, [&](std::size_t i) {
    Rng rng = Rng::derive(cfg_.seed, {tag(Stream::kMinibatch), i, m});
    batches[i] = sample_minibatch(clients_[i].shard, cfg_.minibatch, rng);
    const auto grad = model_.minibatch_gradient(clients_[i].weights, batches[i]);
    auto acc = clients_[i].accumulator.mutable_view();
    const auto g = grad.gradient.view();
    for (std::size_t j = 0; j < dim; ++j) acc[j] += g[j];
  });

  Rng strategy_rng = Rng::derive(cfg_.seed, {tag(Stream::kStrategy), m});
  const ExchangeOutcome outcome =
      exchange_round(cfg_.strategy.kind, clients_, rec.k_used, cfg_.eta, m, strategy_rng);
  const RoundTime rt = round_time(cfg_.timing, outcome.comm_slots(), dim);
  sim_time_ += rt.total;
  rec.selected = outcome.selection.selected.size();
  rec.min_contribution = outcome.aggregated ? outcome.selection.min_contribution() : 0;
  rec.comm_slots = outcome.comm_slots();
  rec.round_time = rt.total;
  rec.sim_time = sim_time_;

  ControllerFeedback fb;
  fb.round_time = rt.total;
  if (controller_->needs_probe()) {
    const double k_prime = rec.k - 0.5 * controller_->step_size();
    Rng probe_rng = Rng::derive(cfg_.seed, {tag(Stream::kProbe), m});
    std::size_t k_prime_int = stochastic_round(std::clamp(k_prime, 1.0, d), dim, probe_rng);
    k_prime_int = std::clamp<std::size_t>(k_prime_int, 1, rec.k_used);
    const AltUpdate alt = build_alt_weights(w_prev, outcome.reports, k_prime_int, cfg_.eta, counts_);
    const double theta_alt = round_time(cfg_.timing, alt.comm_slots, dim).total;
    const ProbeLosses probes =
        collect_probes(model_, batches, w_prev, clients_.front().weights, alt.weights, probe_rng);
    const ProbeRecord pr{probes.prev, probes.cur, probes.alt, rt.total, theta_alt, rec.k, k_prime};
    rec.probe_prev = probes.prev;
    rec.probe_cur = probes.cur;
    rec.probe_alt = probes.alt;
    rec.k_prime = k_prime;
    fb.probe_loss_decrease = probes.prev - probes.cur;
    if (rec.k != k_prime) {
      if (const auto tau_alt = estimate_tau_alt(pr)) {
        fb.sign = estimate_sign(rt.total, *tau_alt, rec.k, k_prime);
        fb.derivative = estimate_derivative(rt.total, *tau_alt, rec.k, k_prime);
        rec.sign = sign_value(fb.sign);
      }
    }
  }
  controller_->observe(fb);
  rec.restart = controller_->restarted();

  rec.train_loss = global_loss();
  if (m % cfg_.eval_every == 0) rec.eval_acc = evaluate_test().accuracy();
  return rec;
}

}  // namespace fabk
