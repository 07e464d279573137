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

#ifndef PCN_EXPERIMENTS_HPP
#define PCN_EXPERIMENTS_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcn/config.hpp"
#include "pcn/data.hpp"
#include "pcn/network.hpp"
#include "pcn/trace.hpp"

namespace pcn {

/// Outcome of one experiment or diagnostic.
///
/// `trace_sets` maps a tag to its records. The empty tag is written as
/// `traces.csv` (or `.json`); any other tag as `traces_<tag>.csv`.
/// `metrics` keys are sorted, which keeps summary.json canonical.
struct ExperimentResult {
  std::string name;
  std::map<std::string, std::vector<TraceRecord>> trace_sets;
  std::map<std::string, double> metrics;
  /// Files the experiment wrote itself, relative to out_dir.
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
};

// Each experiment validates its config, computes, and writes its own extra
// artifacts (images, embeddings, matrices) under config.out_dir.
ExperimentResult exp_variance_estimation(const ExperimentConfig& config);
ExperimentResult exp_weights_learning(const ExperimentConfig& config);
ExperimentResult exp_mnist_classification(const ExperimentConfig& config);
ExperimentResult exp_mnist_reconstruction(const ExperimentConfig& config);
ExperimentResult exp_autoencode(const ExperimentConfig& config);
ExperimentResult exp_fisher_check(const ExperimentConfig& config);
ExperimentResult exp_gradcheck(const ExperimentConfig& config);

/// Dispatches on config.experiment, then writes config.json, summary.json,
/// the trace files and timing.json into config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// summary.json content: name, seed, config hash and metrics. Wall time is
/// kept out so identical runs produce identical bytes.
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

// Building blocks shared with the tests and the C API.

/// config.mnist_dir, else $PCN_MNIST_DIR, else "data/mnist".
std::filesystem::path resolve_mnist_dir(const ExperimentConfig& config);
Dataset load_mnist_split(const std::filesystem::path& dir, bool train);

/// Largest relative error between analytic gradients and -0.5 times a
/// central difference of F (step h), over every activity and weight block.
double gradcheck_network(const PcNetwork& network, double h);

/// Leave-one-out k-nearest-neighbour accuracy (Euclidean, majority vote,
/// ties broken towards the nearer neighbour's label).
double knn_accuracy(const std::vector<Vector>& points, const std::vector<int>& labels,
                    std::size_t k);

/// Binary PGM (P5), values clipped to [0, 1] and scaled to 0..255.
void write_pgm(const std::filesystem::path& path, const Vector& pixels, std::size_t rows,
               std::size_t cols);

/// Top-down decode of layer `from`'s activities down to the input layer.
Vector decode_from(const PcNetwork& network, std::size_t from);

}  // namespace pcn

#endif  // PCN_EXPERIMENTS_HPP
