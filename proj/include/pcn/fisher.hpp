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

#ifndef PCN_FISHER_HPP
#define PCN_FISHER_HPP

#include <cstdint>
#include <span>
#include <string>

#include "pcn/data.hpp"
#include "pcn/network.hpp"

namespace pcn {

/// Names one block of parameters: the activities of a layer or the weights
/// that predict a layer. Text form: "activity:<l>" or "weights:<l>".
struct ParameterSelector {
  enum class Kind { kActivity, kWeights };
  Kind kind = Kind::kActivity;
  std::size_t layer = 0;

  static ParameterSelector parse(const std::string& text);
  std::string to_string() const;
};

struct FisherReport {
  Matrix analytic;
  Matrix empirical;
  /// ||empirical - analytic||_F / ||analytic||_F.
  double relative_error = 0.0;
  std::size_t sample_count = 0;
};

/// Gradient of the log-likelihood (-F/2) with respect to the selected block.
/// Weights are flattened row-major (unit below varies slowest). Reads the
/// errors stored by the last `compute_errors`; clamping is ignored because
/// the score of an observed layer is well defined.
Vector score(const PcNetwork& network, const ParameterSelector& wrt);

/// diag(1 / sigma).
Matrix analytic_fisher_activity(const Vector& sigma);

/// diag(1 / sigma_l) (x) Cov[mu_above], with the unbiased sample covariance of
/// `mu_above_samples`. Throws ArgumentError for fewer than two samples.
Matrix analytic_fisher_weights(const Vector& sigma_l, std::span<const Vector> mu_above_samples);

/// Monte-Carlo Fisher information of the selected block of a linear layer.
///
/// Each sample draws the activities above the selected layer from a zero-mean
/// Gaussian prior (variance `noise.target_noise_var`, or 1 when zero), then
/// draws the layer itself as theta * above + noise (variance
/// `noise.input_noise_var`, or the layer's own sigma when zero), and
/// accumulates the outer product of the score. Sample i uses its own
/// substream of `seed`. Requires identity activations and >= 1000 samples.
FisherReport empirical_fisher(const PcNetwork& network, const ParameterSelector& wrt,
                              const NoiseSpec& noise, std::size_t samples, std::uint64_t seed);

}  // namespace pcn

#endif  // PCN_FISHER_HPP
