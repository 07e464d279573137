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

#ifndef PCN_PRECISION_HPP
#define PCN_PRECISION_HPP

#include <span>
#include <string>
#include <vector>

#include "pcn/network.hpp"
#include "pcn/trace.hpp"

namespace pcn {

class Rng;

/// How the variance of a layer is estimated while observations stream in.
///   kFixedPosterior   weights and hidden activities are frozen
///   kFixedPrediction  the top-down predictions are computed once and reused,
///                     optionally through a fresh dropout mask per step
///   kJoint            activities, weights and variances all move
enum class VarianceMode { kFixedPosterior, kFixedPrediction, kJoint };

std::string to_string(VarianceMode mode);
VarianceMode parse_variance_mode(const std::string& name);

/// Whether each unit keeps its own variance or a layer shares one value.
/// A tied layer still stores one entry per unit, all equal.
enum class VarianceSharing { kPerUnit, kTied };

std::string to_string(VarianceSharing sharing);
VarianceSharing parse_variance_sharing(const std::string& name);

/// eps_i / sigma_i.
Vector precision_weighted_error(const Vector& epsilon, const Vector& sigma);

/// sigma_i + eta (eps_i^2 - sigma_i), floored. The fixed point is E[eps^2].
/// With kTied every unit moves toward the layer mean of eps^2.
Vector variance_step(const Vector& epsilon, const Vector& sigma, double eta_sigma,
                     VarianceSharing sharing = VarianceSharing::kPerUnit,
                     double floor = kSigmaFloor);

struct VarianceEstimationOptions {
  double eta_sigma = 0.1;
  /// Dropout rate applied to the reused prediction in kFixedPrediction mode.
  double prediction_dropout = 0.0;
  /// Activity and weight rates used by kJoint.
  double eta_mu = 0.1;
  double eta_theta = 0.01;
  std::size_t activity_steps = 10;
  VarianceSharing sharing = VarianceSharing::kPerUnit;
};

/// Streams observations into the bottom layer and updates every predicted
/// layer's variance once per step. The stream is cycled when `steps` exceeds
/// its length. Returns one `sigma` record per predicted layer per step
/// (step numbering starts at 1; step 0 holds the initial variances).
/// Throws ArgumentError on an empty stream.
std::vector<TraceRecord> run_variance_estimation(PcNetwork& network,
                                                 std::span<const Vector> stream,
                                                 VarianceMode mode, std::size_t steps,
                                                 const VarianceEstimationOptions& options,
                                                 Rng& rng);

}  // namespace pcn

#endif  // PCN_PRECISION_HPP
