/* Copyright 2026 The vqk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "vqk/config.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vqk/features.h"

namespace vqk {
namespace {

using nlohmann::ordered_json;

ordered_json ToJson(const ExperimentConfig& c) {
  ordered_json j;
  j["model"] = {{"num_classes", c.model.num_classes},
                {"feature_dim", c.model.feature_dim},
                {"hidden_dim", c.model.hidden_dim},
                {"kernel_size", c.model.kernel_size},
                {"leaky_slope", c.model.leaky_slope},
                {"layer_norm_eps", c.model.layer_norm_eps},
                {"query_init_std", c.model.query_init_std}};
  const LossWeights& l = c.train.loss;
  ordered_json loss = {{"alpha", l.alpha},
                       {"beta", l.beta},
                       {"gamma", l.gamma},
                       {"m", l.m},
                       {"cas_margin", l.cas_margin},
                       {"normalize_l1", l.normalize_l1},
                       {"qs_distance", std::string(QsDistanceName(l.qs_distance))}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"min_shared_pairs", c.train.min_shared_pairs},
                {"t_train", c.train.t_train},
                {"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay},
                {"decoupled_weight_decay", c.train.decoupled_weight_decay},
                {"epochs", c.train.epochs},
                {"seed", c.train.seed},
                {"mode", std::string(QueryModeName(c.train.mode))},
                {"loss", loss}};
  j["inference"] = {{"class_threshold", c.inference.class_threshold},
                    {"thresholds", c.inference.thresholds},
                    {"nms_iou", c.inference.nms_iou},
                    {"oic_inflation", c.inference.oic_inflation},
                    {"min_score", c.inference.min_score},
                    {"class_prob_weight", c.inference.class_prob_weight},
                    {"frames_per_segment", c.inference.frames_per_segment}};
  return j;
}

bool SameKind(const ordered_json& a, const ordered_json& b) {
  if (a.is_number() && b.is_number()) {
    return a.is_number_float() || !b.is_number_float();  // no float into an int field
  }
  return a.type() == b.type();
}

// Overlays `patch` on `base` in place, rejecting keys absent from `base`.
void Overlay(ordered_json& base, const ordered_json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    ordered_json& slot = base[it.key()];
    if (slot.is_object()) {
      Overlay(slot, it.value(), key);
    } else if (!SameKind(slot, it.value()) ||
               (slot.is_number_unsigned() && !it.value().is_number_unsigned())) {
      throw ConfigError("config: '" + key + "' has the wrong type");
    } else {
      slot = it.value();
    }
  }
}

ExperimentConfig FromJson(const ordered_json& j) {
  ExperimentConfig c;
  const ordered_json& m = j["model"];
  c.model.num_classes = m["num_classes"].get<int>();
  c.model.feature_dim = m["feature_dim"].get<int>();
  c.model.hidden_dim = m["hidden_dim"].get<int>();
  c.model.kernel_size = m["kernel_size"].get<int>();
  c.model.leaky_slope = m["leaky_slope"].get<double>();
  c.model.layer_norm_eps = m["layer_norm_eps"].get<double>();
  c.model.query_init_std = m["query_init_std"].get<double>();
  const ordered_json& t = j["train"];
  c.train.batch_size = t["batch_size"].get<int>();
  c.train.min_shared_pairs = t["min_shared_pairs"].get<int>();
  c.train.t_train = t["t_train"].get<int>();
  c.train.learning_rate = t["learning_rate"].get<double>();
  c.train.weight_decay = t["weight_decay"].get<double>();
  c.train.decoupled_weight_decay = t["decoupled_weight_decay"].get<bool>();
  c.train.epochs = t["epochs"].get<int>();
  c.train.seed = t["seed"].get<std::uint64_t>();
  const ordered_json& l = t["loss"];
  c.train.loss.alpha = l["alpha"].get<double>();
  c.train.loss.beta = l["beta"].get<double>();
  c.train.loss.gamma = l["gamma"].get<double>();
  c.train.loss.m = l["m"].get<int>();
  c.train.loss.cas_margin = l["cas_margin"].get<double>();
  c.train.loss.normalize_l1 = l["normalize_l1"].get<bool>();
  const ordered_json& inf = j["inference"];
  c.inference.class_threshold = inf["class_threshold"].get<double>();
  c.inference.thresholds = inf["thresholds"].get<std::vector<double>>();
  c.inference.nms_iou = inf["nms_iou"].get<double>();
  c.inference.oic_inflation = inf["oic_inflation"].get<double>();
  c.inference.min_score = inf["min_score"].get<double>();
  c.inference.class_prob_weight = inf["class_prob_weight"].get<double>();
  c.inference.frames_per_segment = inf["frames_per_segment"].get<int>();
  c.train.loss.qs_distance = ParseQsDistance(l["qs_distance"].get<std::string>());
  c.train.mode = ParseQueryMode(t["mode"].get<std::string>());
  return c;
}

}  // namespace

void ExperimentConfig::Validate() const {
  model.Validate();
  train.Validate();
  inference.Validate();
}

std::string ConfigToJson(const ExperimentConfig& config) { return ToJson(config).dump(2); }

ExperimentConfig ParseConfig(std::string_view text, const ExperimentConfig& base) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ordered_json merged = ToJson(base);
  Overlay(merged, doc, "");
  ExperimentConfig c;
  try {
    c = FromJson(merged);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseConfig(buf.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void SaveConfig(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << ConfigToJson(config) << "\n";
}

}  // namespace vqk
