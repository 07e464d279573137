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

#ifndef PCN_CONFIG_HPP
#define PCN_CONFIG_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pcn/data.hpp"
#include "pcn/train.hpp"

namespace pcn {

inline constexpr std::array<std::string_view, 7> kExperimentNames = {
    "variance-estimation", "weights-learning", "mnist-classify", "mnist-reconstruct",
    "autoencode",          "fisher-check",     "gradcheck"};

bool is_experiment_name(std::string_view name);

/// Everything an experiment or diagnostic needs. Fields that an experiment
/// does not read are still validated and echoed so the resolved file is a
/// complete record of the run.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;

  // architecture
  std::vector<std::size_t> widths;
  std::vector<std::string> activations;

  Schedule schedule;
  /// Activity updates used when evaluating (no learning).
  std::size_t t_activity_test = 100;

  // optimizer
  std::string optimizer = "sgd";
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  double adadelta_learning_rate = 1.0;

  NoiseSpec noise;

  // synthetic streams
  double signal_mean = 0.0;
  double signal_variance = 10.0;
  double target_value = 2.5;

  // run lengths
  std::size_t seeds = 1;
  std::size_t steps = 100;
  std::size_t average_window = 50;
  std::size_t epochs = 1;
  std::size_t train_limit = 60000;
  std::size_t test_limit = 10000;

  // diagnostics
  std::size_t samples = 100000;
  std::vector<double> fisher_sigma = {1.0, 2.0, 4.0};
  std::size_t networks = 100;
  double fd_step = 1e-5;
  std::size_t knn_k = 5;
  std::size_t image_dump_count = 16;

  // data and output
  std::string mnist_dir;
  std::string out_dir = "pcn_out";
  std::string format = "csv";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Defaults for one experiment; throws ConfigError("experiment", ...) for an
/// unknown name.
ExperimentConfig default_config(const std::string& experiment);

/// Overlays `doc` on `base`. Unknown keys anywhere in the document are
/// rejected with a ConfigError naming the dotted key path. The result is not
/// validated.
ExperimentConfig merge_config(const ExperimentConfig& base, const nlohmann::json& doc);

/// Parses a whole document. The experiment comes from the document's
/// "experiment" key, or from `experiment` when the key is absent; a mismatch
/// between the two is an error.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& experiment = "");
ExperimentConfig parse_config_text(std::string_view text, const std::string& experiment = "");

nlohmann::json to_json(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical (sorted-key, compact) JSON.
std::string config_hash(const ExperimentConfig& config);

std::vector<Activation> parsed_activations(const ExperimentConfig& config);
WeightOptimizer parsed_optimizer(const ExperimentConfig& config);

}  // namespace pcn

#endif  // PCN_CONFIG_HPP
