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

#include "fabk/config.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "fabk/error.h"
#include "json.hpp"

namespace fabk {
namespace {

using Json = nlohmann::json;

// Typed access to one JSON object that remembers which keys were read, so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(where() + " must be an object");
  }
  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as<T>(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const Json kEmpty = Json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, path_ + key + ".");
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw InputError("unknown config key '" + path_ + key + "'");
  }

  std::string name(const std::string& key) const { return path_ + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_.substr(0, path_.size() - 1); }

  template <typename T>
  T as(const std::string& key) {
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
          throw InputError("'" + name(key) + "' must be a nonnegative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw InputError("'" + name(key) + "' must be a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw InputError("'" + name(key) + "' must be a string");
      }
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw InputError("'" + name(key) + "': " + e.what());
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
}

ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  Section root(j, "");
  cfg.id = root.get<std::string>("id", cfg.id);
  require(!cfg.id.empty(), "'id' must be nonempty");
  cfg.seed = root.get<std::uint64_t>("seed", cfg.seed);

  {
    Section d = root.child("dataset");
    const auto kind = d.get<std::string>("kind", "synthetic");
    if (kind == "synthetic") {
      cfg.dataset.kind = DatasetConfig::Kind::kSynthetic;
      auto& s = cfg.dataset.synth;
      s.num_classes = d.get<std::size_t>("num_classes", s.num_classes);
      s.dim = d.get<std::size_t>("dim", s.dim);
      s.samples_per_class = d.get<std::size_t>("samples_per_class", s.samples_per_class);
      s.separation = d.get<double>("separation", s.separation);
      s.noise = d.get<double>("noise", s.noise);
      cfg.dataset.test_samples_per_class =
          d.get<std::size_t>("test_samples_per_class", cfg.dataset.test_samples_per_class);
      require(s.num_classes >= 2 && s.dim >= 1 && s.samples_per_class >= 1,
              "synthetic dataset needs num_classes >= 2, dim >= 1, samples_per_class >= 1");
      require(s.noise >= 0.0 && s.separation >= 0.0, "separation and noise must be >= 0");
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetConfig::Kind::kCsv;
      require(d.has("path"), "'dataset.path' is required for csv datasets");
      cfg.dataset.csv_path = resolve(d.get<std::string>("path", ""), base_dir);
      if (d.has("test_path"))
        cfg.dataset.test_csv_path = resolve(d.get<std::string>("test_path", ""), base_dir);
    } else {
      throw InputError("'dataset.kind' must be 'synthetic' or 'csv'");
    }
    d.reject_unknown();
  }
  {
    Section m = root.child("model");
    const auto kind = m.get<std::string>("kind", "logistic");
    if (kind == "logistic") {
      cfg.hidden_dim = 0;
    } else if (kind == "mlp") {
      cfg.hidden_dim = m.get<std::size_t>("hidden", 32);
      require(cfg.hidden_dim >= 1, "'model.hidden' must be >= 1");
    } else {
      throw InputError("'model.kind' must be 'logistic' or 'mlp'");
    }
    m.reject_unknown();
  }
  cfg.clients = root.get<std::size_t>("clients", cfg.clients);
  require(cfg.clients >= 1, "'clients' must be >= 1");
  cfg.minibatch = root.get<std::size_t>("minibatch", cfg.minibatch);
  require(cfg.minibatch >= 1, "'minibatch' must be >= 1");
  cfg.eta = root.get<double>("eta", cfg.eta);
  require(cfg.eta > 0.0, "'eta' must be positive");
  {
    Section s = root.child("strategy");
    cfg.strategy.kind = parse_strategy_kind(s.get<std::string>("kind", "fab_topk"));
    if (auto k = s.optional<double>("k")) {
      require(*k >= 1.0, "'strategy.k' must be >= 1");
      cfg.strategy.k = *k;
      cfg.strategy_k_set = true;
    }
    s.reject_unknown();
  }
  {
    Section c = root.child("controller");
    auto& cc = cfg.controller;
    cc.kind = parse_controller_kind(c.get<std::string>("kind", "fixed"));
    cc.k_min = c.optional<double>("k_min");
    cc.k_max = c.optional<double>("k_max");
    cc.k_initial = c.optional<double>("k_initial");
    cc.varying.alpha = c.get<double>("alpha", cc.varying.alpha);
    require(cc.varying.alpha >= 1.0, "'controller.alpha' must be >= 1");
    cc.varying.update_window = c.get<std::size_t>("update_window", cc.varying.update_window);
    require(cc.varying.update_window >= 1, "'controller.update_window' must be >= 1");
    cc.exp3.arms = c.get<std::size_t>("exp3_arms", cc.exp3.arms);
    require(cc.exp3.arms >= 1, "'controller.exp3_arms' must be >= 1");
    cc.exp3.gamma = c.get<double>("exp3_gamma", cc.exp3.gamma);
    require(cc.exp3.gamma >= 0.0 && cc.exp3.gamma <= 1.0, "'controller.exp3_gamma' must be in [0, 1]");
    cc.exp3.learning_rate = c.get<double>("exp3_learning_rate", cc.exp3.learning_rate);
    cc.exp3_cost_scale = c.get<double>("exp3_cost_scale", cc.exp3_cost_scale);
    if (c.has("replay")) {
      const Json& r = c.raw("replay");
      require(r.is_array(), "'controller.replay' must be an array of numbers");
      for (const auto& v : r) {
        require(v.is_number(), "'controller.replay' must be an array of numbers");
        cc.replay.push_back(v.get<double>());
      }
    }
    if (c.has("replay_from")) cc.replay_from = resolve(c.get<std::string>("replay_from", ""), base_dir);
    if (cc.kind == ControllerKind::kReplay)
      require(!cc.replay.empty() || !cc.replay_from.empty(),
              "replay controller needs 'controller.replay' or 'controller.replay_from'");
    c.reject_unknown();
  }
  {
    Section t = root.child("timing");
    cfg.timing.comm_time_full = t.get<double>("comm_time_full", cfg.timing.comm_time_full);
    cfg.timing.compute_time = t.get<double>("compute_time", cfg.timing.compute_time);
    require(cfg.timing.comm_time_full >= 0.0, "'timing.comm_time_full' must be >= 0");
    require(cfg.timing.compute_time >= 0.0, "'timing.compute_time' must be >= 0");
    t.reject_unknown();
  }
  {
    Section s = root.child("stop");
    cfg.target_loss = s.optional<double>("target_loss");
    cfg.max_rounds = s.get<std::size_t>("max_rounds", cfg.max_rounds);
    require(cfg.max_rounds >= 1, "'stop.max_rounds' must be >= 1");
    s.reject_unknown();
  }
  cfg.eval_every = root.get<std::size_t>("eval_every", cfg.eval_every);
  require(cfg.eval_every >= 1, "'eval_every' must be >= 1");
  cfg.threads = root.get<std::size_t>("threads", cfg.threads);
  {
    Section d = root.child("divergence");
    cfg.divergence_factor = d.get<double>("factor", cfg.divergence_factor);
    cfg.divergence_window = d.get<std::size_t>("window", cfg.divergence_window);
    require(cfg.divergence_factor > 1.0, "'divergence.factor' must exceed 1");
    require(cfg.divergence_window >= 1, "'divergence.window' must be >= 1");
    d.reject_unknown();
  }
  root.reject_unknown();

  const bool adaptive = cfg.controller.kind != ControllerKind::kFixed &&
                        cfg.controller.kind != ControllerKind::kReplay;
  if (cfg.controller.kind == ControllerKind::kFixed)
    require(cfg.strategy_k_set || cfg.strategy.kind == StrategyKind::kSendAll,
            "'strategy.k' is required with the fixed controller");
  if (adaptive)
    require(cfg.strategy.kind == StrategyKind::kFabTopK,
            "adaptive controllers drive the fab_topk strategy only");
  return cfg;
}

void set_path(Json& j, const std::string& dotted, const Json& value) {
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InputError("bad sweep key '" + dotted + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string id_fragment(const std::string& key, const Json& value) {
  const auto dot = key.rfind('.');
  std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
  std::string v = value.is_string() ? value.get<std::string>() : value.dump();
  for (char& ch : v)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_')) ch = '_';
  return leaf + "=" + v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  return from_json(parse_json(text), base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["id"] = cfg.id;
  j["seed"] = cfg.seed;
  auto& d = j["dataset"];
  if (cfg.dataset.kind == DatasetConfig::Kind::kSynthetic) {
    d["kind"] = "synthetic";
    d["num_classes"] = cfg.dataset.synth.num_classes;
    d["dim"] = cfg.dataset.synth.dim;
    d["samples_per_class"] = cfg.dataset.synth.samples_per_class;
    d["separation"] = cfg.dataset.synth.separation;
    d["noise"] = cfg.dataset.synth.noise;
    d["test_samples_per_class"] = cfg.dataset.test_samples_per_class;
  } else {
    d["kind"] = "csv";
    d["path"] = cfg.dataset.csv_path.string();
    if (!cfg.dataset.test_csv_path.empty()) d["test_path"] = cfg.dataset.test_csv_path.string();
  }
  if (cfg.hidden_dim == 0) {
    j["model"] = {{"kind", "logistic"}};
  } else {
    j["model"]["kind"] = "mlp";
    j["model"]["hidden"] = cfg.hidden_dim;
  }
  j["clients"] = cfg.clients;
  j["minibatch"] = cfg.minibatch;
  j["eta"] = cfg.eta;
  j["strategy"]["kind"] = std::string(to_string(cfg.strategy.kind));
  if (cfg.strategy_k_set) j["strategy"]["k"] = cfg.strategy.k;
  auto& c = j["controller"];
  const auto& cc = cfg.controller;
  c["kind"] = std::string(to_string(cc.kind));
  if (cc.k_min) c["k_min"] = *cc.k_min;
  if (cc.k_max) c["k_max"] = *cc.k_max;
  if (cc.k_initial) c["k_initial"] = *cc.k_initial;
  c["alpha"] = cc.varying.alpha;
  c["update_window"] = cc.varying.update_window;
  c["exp3_arms"] = cc.exp3.arms;
  c["exp3_gamma"] = cc.exp3.gamma;
  c["exp3_learning_rate"] = cc.exp3.learning_rate;
  c["exp3_cost_scale"] = cc.exp3_cost_scale;
  if (!cc.replay.empty()) c["replay"] = cc.replay;
  if (!cc.replay_from.empty()) c["replay_from"] = cc.replay_from.string();
  j["timing"]["comm_time_full"] = cfg.timing.comm_time_full;
  j["timing"]["compute_time"] = cfg.timing.compute_time;
  if (cfg.target_loss) j["stop"]["target_loss"] = *cfg.target_loss;
  j["stop"]["max_rounds"] = cfg.max_rounds;
  j["eval_every"] = cfg.eval_every;
  j["threads"] = cfg.threads;
  j["divergence"]["factor"] = cfg.divergence_factor;
  j["divergence"]["window"] = cfg.divergence_window;
  return j.dump(2);
}

SweepConfig parse_sweep_config(const std::string& text) {
  const Json j = parse_json(text);
  Section root(j, "");
  SweepConfig sweep;
  require(root.has("base"), "sweep config needs a 'base' experiment");
  sweep.base_text = root.raw("base").dump();
  if (root.has("grid")) {
    const Json& g = root.raw("grid");
    require(g.is_object(), "'grid' must map dotted keys to value arrays");
    for (const auto& [key, values] : g.items()) {
      require(values.is_array(), "'grid." + key + "' must be an array");
      std::vector<std::string> dumped;
      for (const auto& v : values) dumped.push_back(v.dump());
      sweep.grid.emplace_back(key, std::move(dumped));
    }
  }
  sweep.parallel = root.get<std::size_t>("parallel", sweep.parallel);
  root.reject_unknown();
  return sweep;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  SweepConfig sweep = parse_sweep_config(read_file(path));
  sweep.base_dir = path.parent_path();
  return sweep;
}

std::vector<ExperimentConfig> expand_sweep(const SweepConfig& sweep) {
  const Json base = parse_json(sweep.base_text);
  std::vector<ExperimentConfig> out;
  if (sweep.grid.empty()) return out;
  for (const auto& [key, values] : sweep.grid)
    if (values.empty()) return out;
  std::vector<std::size_t> pos(sweep.grid.size(), 0);
  const std::string base_id = base.value("id", std::string("run"));
  while (true) {
    Json j = base;
    std::string id = base_id;
    for (std::size_t g = 0; g < sweep.grid.size(); ++g) {
      const Json value = Json::parse(sweep.grid[g].second[pos[g]]);
      set_path(j, sweep.grid[g].first, value);
      id += "__" + id_fragment(sweep.grid[g].first, value);
    }
    j["id"] = id;
    out.push_back(from_json(j, sweep.base_dir));
    // Odometer increment, last key fastest.
    std::size_t g = sweep.grid.size();
    while (g > 0) {
      --g;
      if (++pos[g] < sweep.grid[g].second.size()) break;
      pos[g] = 0;
      if (g == 0) return out;
    }
  }
}

AssumptionCheckConfig load_assumption_config(const std::filesystem::path& path) {
  const Json j = parse_json(read_file(path));
  Section root(j, "");
  AssumptionCheckConfig cfg;
  require(root.has("base"), "assumption config needs a 'base' experiment");
  cfg.base = from_json(root.raw("base"), path.parent_path());
  require(root.has("initial_k"), "assumption config needs 'initial_k'");
  for (const auto& v : root.raw("initial_k")) {
    require(v.is_number() && v.get<double>() >= 1.0, "'initial_k' entries must be numbers >= 1");
    cfg.initial_k.push_back(v.get<double>());
  }
  require(cfg.initial_k.size() >= 2, "'initial_k' needs at least two values");
  cfg.switch_k = root.get<double>("switch_k", cfg.switch_k);
  cfg.target_loss = root.get<double>("target_loss", cfg.target_loss);
  cfg.post_rounds = root.get<std::size_t>("post_rounds", cfg.post_rounds);
  cfg.tolerance = root.get<double>("tolerance", cfg.tolerance);
  root.reject_unknown();
  return cfg;
}

std::vector<double> read_k_sequence(const std::filesystem::path& rounds_jsonl) {
  std::ifstream in(rounds_jsonl);
  if (!in) throw InputError("cannot open " + rounds_jsonl.string());
  std::vector<double> ks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ks.push_back(Json::parse(line).at("k").get<double>());
    } catch (const Json::exception& e) {
      throw InputError(rounds_jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (ks.empty()) throw InputError(rounds_jsonl.string() + " holds no rounds");
  return ks;
}

}  // namespace fabk
