// Copyright 2026 The pcn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <type_traits>

#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

using nlohmann::json;

bool is_experiment_name(std::string_view name) {
  return std::find(kExperimentNames.begin(), kExperimentNames.end(), name) !=
         kExperimentNames.end();
}

ExperimentConfig default_config(const std::string& experiment) {
  if (!is_experiment_name(experiment)) {
    std::string known;
    for (auto n : kExperimentNames) known += (known.empty() ? "" : "|") + std::string(n);
    throw ConfigError("experiment", "unknown experiment '" + experiment + "' (expected " +
                                        known + ")");
  }
  ExperimentConfig c;
  c.experiment = experiment;
  c.out_dir = "pcn_out/" + experiment;

  if (experiment == "variance-estimation") {
    c.widths = {16, 8, 4};
    c.activations = {"identity", "identity"};
    c.signal_mean = 0.0;
    c.signal_variance = 10.0;
    c.noise.prediction_dropout = 0.3;
    c.seeds = 10;
    c.steps = 100;
    c.average_window = 50;
    c.schedule.eta_sigma = 0.1;
    c.schedule.t_activity = 100;
  } else if (experiment == "weights-learning") {
    c.widths = {1, 1};
    c.activations = {"identity"};
    c.signal_mean = 5.0;
    c.signal_variance = 2.0;
    c.target_value = 2.5;
    c.noise.target_noise_var = 2.0;
    c.seeds = 20;
    c.steps = 2000;
    c.average_window = 500;
    c.schedule.t_activity = 0;
    c.schedule.eta_theta = 0.01;
    c.schedule.eta_sigma = 0.05;
  } else if (experiment == "mnist-classify" || experiment == "mnist-reconstruct") {
    c.widths = {784, 256, 10};
    c.activations = {"identity", "identity"};
    c.schedule.t_activity = 10;
    c.schedule.eta_mu = 0.03;
    c.schedule.eta_theta = 0.003;
    c.schedule.precision_weighting = false;
    c.schedule.variance_sharing = VarianceSharing::kTied;
    c.t_activity_test = 100;
    c.epochs = 1;
    c.test_limit = 10000;
    if (experiment == "mnist-classify") {
      c.noise.prediction_dropout = 0.3;
    } else {
      c.t_activity_test = 10;
      c.test_limit = 1000;
    }
  } else if (experiment == "autoencode") {
    c.widths = {784, 256, 32};
    c.activations = {"identity", "tanh"};
    c.schedule.t_activity = 20;
    c.schedule.eta_mu = 0.03;
    c.schedule.eta_theta = 0.01;
    c.schedule.precision_weighting = false;
    c.schedule.variance_sharing = VarianceSharing::kTied;
    c.t_activity_test = 100;
    c.epochs = 1;
    c.test_limit = 2000;
  } else if (experiment == "fisher-check") {
    c.widths = {3, 2};
    c.activations = {"identity"};
    c.samples = 100000;
  } else {  // gradcheck
    c.networks = 100;
    c.widths = {32, 32, 32, 32};
    c.activations = {"tanh", "tanh", "tanh"};
  }
  return c;
}

namespace {

// Reads one typed value, naming the dotted path on mismatch.
template <typename T>
T read_as(const json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false, got " + v.dump());
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(path, "expected a number, got " + v.dump());
    return v.get<double>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(path, "expected a string, got " + v.dump());
    return v.get<std::string>();
  } else {
    static_assert(std::is_unsigned_v<T>, "unsupported config field type");
    if (!v.is_number_unsigned()) {
      throw ConfigError(path, "expected a non-negative integer, got " + v.dump());
    }
    return static_cast<T>(v.get<std::uint64_t>());
  }
}

template <typename T>
std::vector<T> read_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array, got " + v.dump());
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(read_as<T>(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;
using Section = std::map<std::string, Setter>;

template <typename T, typename F>
Setter field(F assign) {
  return [assign](ExperimentConfig& c, const json& v, const std::string& path) {
    assign(c, read_as<T>(v, path));
  };
}

const std::map<std::string, Section>& sections() {
  static const std::map<std::string, Section> table = {
      {"architecture",
       {{"widths",
         [](ExperimentConfig& c, const json& v, const std::string& p) {
           c.widths = read_list<std::size_t>(v, p);
         }},
        {"activations",
         [](ExperimentConfig& c, const json& v, const std::string& p) {
           c.activations = read_list<std::string>(v, p);
         }}}},
      {"schedule",
       {{"t_activity", field<std::size_t>([](auto& c, auto x) { c.schedule.t_activity = x; })},
        {"t_activity_test", field<std::size_t>([](auto& c, auto x) { c.t_activity_test = x; })},
        {"weight_updates_per_sample",
         field<std::size_t>([](auto& c, auto x) { c.schedule.weight_updates_per_sample = x; })},
        {"variance_updates_per_sample",
         field<std::size_t>(
             [](auto& c, auto x) { c.schedule.variance_updates_per_sample = x; })},
        {"eta_mu", field<double>([](auto& c, auto x) { c.schedule.eta_mu = x; })},
        {"eta_theta", field<double>([](auto& c, auto x) { c.schedule.eta_theta = x; })},
        {"eta_sigma", field<double>([](auto& c, auto x) { c.schedule.eta_sigma = x; })},
        {"precision_weighting",
         field<bool>([](auto& c, auto x) { c.schedule.precision_weighting = x; })},
        {"preconditioner",
         [](ExperimentConfig& c, const json& v, const std::string& p) {
           try {
             c.schedule.preconditioner = parse_preconditioner(read_as<std::string>(v, p));
           } catch (const ArgumentError& e) {
             throw ConfigError(p, e.what());
           }
         }},
        {"variance_sharing",
         [](ExperimentConfig& c, const json& v, const std::string& p) {
           try {
             c.schedule.variance_sharing = parse_variance_sharing(read_as<std::string>(v, p));
           } catch (const ArgumentError& e) {
             throw ConfigError(p, e.what());
           }
         }}}},
      {"optimizer",
       {{"name", field<std::string>([](auto& c, auto x) { c.optimizer = x; })},
        {"rho", field<double>([](auto& c, auto x) { c.adadelta_rho = x; })},
        {"eps", field<double>([](auto& c, auto x) { c.adadelta_eps = x; })},
        {"learning_rate",
         field<double>([](auto& c, auto x) { c.adadelta_learning_rate = x; })}}},
      {"noise",
       {{"input_noise_var", field<double>([](auto& c, auto x) { c.noise.input_noise_var = x; })},
        {"target_noise_var",
         field<double>([](auto& c, auto x) { c.noise.target_noise_var = x; })},
        {"prediction_dropout",
         field<double>([](auto& c, auto x) { c.noise.prediction_dropout = x; })}}},
      {"signal",
       {{"mean", field<double>([](auto& c, auto x) { c.signal_mean = x; })},
        {"variance", field<double>([](auto& c, auto x) { c.signal_variance = x; })},
        {"target", field<double>([](auto& c, auto x) { c.target_value = x; })}}},
      {"run",
       {{"seeds", field<std::size_t>([](auto& c, auto x) { c.seeds = x; })},
        {"steps", field<std::size_t>([](auto& c, auto x) { c.steps = x; })},
        {"average_window", field<std::size_t>([](auto& c, auto x) { c.average_window = x; })},
        {"epochs", field<std::size_t>([](auto& c, auto x) { c.epochs = x; })},
        {"train_limit", field<std::size_t>([](auto& c, auto x) { c.train_limit = x; })},
        {"test_limit", field<std::size_t>([](auto& c, auto x) { c.test_limit = x; })},
        {"samples", field<std::size_t>([](auto& c, auto x) { c.samples = x; })},
        {"fisher_sigma",
         [](ExperimentConfig& c, const json& v, const std::string& p) {
           c.fisher_sigma = read_list<double>(v, p);
         }},
        {"networks", field<std::size_t>([](auto& c, auto x) { c.networks = x; })},
        {"fd_step", field<double>([](auto& c, auto x) { c.fd_step = x; })},
        {"knn_k", field<std::size_t>([](auto& c, auto x) { c.knn_k = x; })},
        {"image_dump_count",
         field<std::size_t>([](auto& c, auto x) { c.image_dump_count = x; })}}},
      {"data", {{"mnist_dir", field<std::string>([](auto& c, auto x) { c.mnist_dir = x; })}}},
      {"output",
       {{"out_dir", field<std::string>([](auto& c, auto x) { c.out_dir = x; })},
        {"format", field<std::string>([](auto& c, auto x) { c.format = x; })}}},
  };
  return table;
}

}  // namespace

ExperimentConfig merge_config(const ExperimentConfig& base, const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      c.experiment = read_as<std::string>(value, key);
      continue;
    }
    if (key == "seed") {
      c.seed = read_as<std::uint64_t>(value, key);
      continue;
    }
    const auto section = sections().find(key);
    if (section == sections().end()) throw ConfigError(key, "unknown key");
    if (!value.is_object()) throw ConfigError(key, "expected an object, got " + value.dump());
    for (const auto& [sub, sub_value] : value.items()) {
      const std::string path = key + "." + sub;
      const auto setter = section->second.find(sub);
      if (setter == section->second.end()) throw ConfigError(path, "unknown key");
      setter->second(c, sub_value, path);
    }
  }
  return c;
}

ExperimentConfig parse_config(const json& doc, const std::string& experiment) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  std::string name = experiment;
  if (doc.contains("experiment")) {
    const std::string in_doc = read_as<std::string>(doc["experiment"], "experiment");
    if (!experiment.empty() && in_doc != experiment) {
      throw ConfigError("experiment", "config file is for '" + in_doc + "' but '" +
                                          experiment + "' was requested");
    }
    name = in_doc;
  }
  if (name.empty()) throw ConfigError("experiment", "missing");
  return merge_config(default_config(name), doc);
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& experiment) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, experiment);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["architecture"] = {{"widths", c.widths}, {"activations", c.activations}};
  j["schedule"] = {{"t_activity", c.schedule.t_activity},
                   {"t_activity_test", c.t_activity_test},
                   {"weight_updates_per_sample", c.schedule.weight_updates_per_sample},
                   {"variance_updates_per_sample", c.schedule.variance_updates_per_sample},
                   {"eta_mu", c.schedule.eta_mu},
                   {"eta_theta", c.schedule.eta_theta},
                   {"eta_sigma", c.schedule.eta_sigma},
                   {"precision_weighting", c.schedule.precision_weighting},
                   {"preconditioner", to_string(c.schedule.preconditioner)},
                   {"variance_sharing", to_string(c.schedule.variance_sharing)}};
  j["optimizer"] = {{"name", c.optimizer},
                    {"rho", c.adadelta_rho},
                    {"eps", c.adadelta_eps},
                    {"learning_rate", c.adadelta_learning_rate}};
  j["noise"] = {{"input_noise_var", c.noise.input_noise_var},
                {"target_noise_var", c.noise.target_noise_var},
                {"prediction_dropout", c.noise.prediction_dropout}};
  j["signal"] = {{"mean", c.signal_mean}, {"variance", c.signal_variance},
                 {"target", c.target_value}};
  j["run"] = {{"seeds", c.seeds},
              {"steps", c.steps},
              {"average_window", c.average_window},
              {"epochs", c.epochs},
              {"train_limit", c.train_limit},
              {"test_limit", c.test_limit},
              {"samples", c.samples},
              {"fisher_sigma", c.fisher_sigma},
              {"networks", c.networks},
              {"fd_step", c.fd_step},
              {"knn_k", c.knn_k},
              {"image_dump_count", c.image_dump_count}};
  j["data"] = {{"mnist_dir", c.mnist_dir}};
  j["output"] = {{"out_dir", c.out_dir}, {"format", c.format}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
  return buf;
}

std::vector<Activation> parsed_activations(const ExperimentConfig& config) {
  std::vector<Activation> out;
  for (std::size_t i = 0; i < config.activations.size(); ++i) {
    try {
      out.push_back(parse_activation(config.activations[i]));
    } catch (const ArgumentError& e) {
      throw ConfigError("architecture.activations[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

WeightOptimizer parsed_optimizer(const ExperimentConfig& config) {
  try {
    return parse_weight_optimizer(config.optimizer);
  } catch (const ArgumentError& e) {
    throw ConfigError("optimizer.name", e.what());
  }
}

void ExperimentConfig::validate() const {
  if (!is_experiment_name(experiment)) default_config(experiment);  // throws

  if (widths.size() < 2) throw ConfigError("architecture.widths", "need at least 2 layers");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == 0) {
      throw ConfigError("architecture.widths[" + std::to_string(i) + "]", "must be >= 1");
    }
  }
  if (activations.size() != widths.size() - 1) {
    throw ConfigError("architecture.activations",
                      "need one entry per predicted layer (" +
                          std::to_string(widths.size() - 1) + "), got " +
                          std::to_string(activations.size()));
  }
  const auto acts = parsed_activations(*this);

  if (!(schedule.eta_mu > 0.0)) throw ConfigError("schedule.eta_mu", "must be > 0");
  if (!(schedule.eta_theta > 0.0)) throw ConfigError("schedule.eta_theta", "must be > 0");
  if (!(schedule.eta_sigma > 0.0 && schedule.eta_sigma <= 1.0)) {
    throw ConfigError("schedule.eta_sigma", "must lie in (0, 1]");
  }

  parsed_optimizer(*this);
  if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0)) {
    throw ConfigError("optimizer.rho", "must lie in (0, 1)");
  }
  if (!(adadelta_eps > 0.0)) throw ConfigError("optimizer.eps", "must be > 0");
  if (!(adadelta_learning_rate > 0.0)) {
    throw ConfigError("optimizer.learning_rate", "must be > 0");
  }

  if (!(noise.input_noise_var >= 0.0)) {
    throw ConfigError("noise.input_noise_var", "must be >= 0");
  }
  if (!(noise.target_noise_var >= 0.0)) {
    throw ConfigError("noise.target_noise_var", "must be >= 0");
  }
  if (!(noise.prediction_dropout >= 0.0 && noise.prediction_dropout < 1.0)) {
    throw ConfigError("noise.prediction_dropout", "must lie in [0, 1)");
  }
  if (!(signal_variance >= 0.0)) throw ConfigError("signal.variance", "must be >= 0");

  if (seeds == 0) throw ConfigError("run.seeds", "must be >= 1");
  if (steps == 0) throw ConfigError("run.steps", "must be >= 1");
  if (average_window == 0 || average_window > steps) {
    throw ConfigError("run.average_window", "must lie in [1, run.steps]");
  }
  if (train_limit == 0) throw ConfigError("run.train_limit", "must be >= 1");
  if (test_limit == 0) throw ConfigError("run.test_limit", "must be >= 1");
  if (samples < 1000) throw ConfigError("run.samples", "must be >= 1000");
  if (fisher_sigma.empty()) throw ConfigError("run.fisher_sigma", "must not be empty");
  for (double s : fisher_sigma) {
    if (!(s >= kSigmaFloor)) throw ConfigError("run.fisher_sigma", "entries must be >= 1e-6");
  }
  if (networks == 0) throw ConfigError("run.networks", "must be >= 1");
  if (!(fd_step > 0.0)) throw ConfigError("run.fd_step", "must be > 0");
  if (knn_k == 0) throw ConfigError("run.knn_k", "must be >= 1");

  if (format != "csv" && format != "json") {
    throw ConfigError("output.format", "expected csv|json, got '" + format + "'");
  }
  if (out_dir.empty()) throw ConfigError("output.out_dir", "must not be empty");

  const bool mnist = experiment == "mnist-classify" || experiment == "mnist-reconstruct" ||
                     experiment == "autoencode";
  if (mnist && widths.front() != 784) {
    throw ConfigError("architecture.widths", "MNIST models need 784 input units");
  }
  if ((experiment == "mnist-classify" || experiment == "mnist-reconstruct") &&
      widths.back() != 10) {
    throw ConfigError("architecture.widths", "label-clamped models need 10 top units");
  }
  if (experiment == "fisher-check") {
    for (Activation a : acts) {
      if (a != Activation::kIdentity) {
        throw ConfigError("architecture.activations",
                          "fisher-check needs linear layers; the closed-form Fisher assumes "
                          "f(theta mu) = theta mu");
      }
    }
    if (fisher_sigma.size() != widths.front()) {
      throw ConfigError("run.fisher_sigma",
                        "needs one variance per bottom unit (" +
                            std::to_string(widths.front()) + ")");
    }
  }
  if (experiment == "weights-learning" && (widths.size() != 2 || widths[0] != 1 ||
                                           widths[1] != 1)) {
    throw ConfigError("architecture.widths", "weights-learning is a scalar model [1, 1]");
  }
}

}  // namespace pcn
