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

#ifndef PCN_TRAIN_HPP
#define PCN_TRAIN_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pcn/network.hpp"
#include "pcn/precision.hpp"

namespace pcn {

class Rng;

/// Extra factor applied to each layer's descent direction.
///   kNone        the precision already inside the weighted errors is all
///   kPrecision   additionally scale by 1/sigma of the updated layer
///   kCovariance  scale by sigma (inverse Fisher of the layer's own term)
/// The top layer has no variance and uses the mean variance of the layer below.
enum class Preconditioner { kNone, kPrecision, kCovariance };

std::string to_string(Preconditioner p);
Preconditioner parse_preconditioner(const std::string& name);

enum class WeightOptimizer { kSgd, kAdadelta };

std::string to_string(WeightOptimizer o);
WeightOptimizer parse_weight_optimizer(const std::string& name);

/// Timescales of one sample presentation.
struct Schedule {
  std::size_t t_activity = 10;
  std::size_t weight_updates_per_sample = 1;
  std::size_t variance_updates_per_sample = 1;
  double eta_mu = 0.1;
  double eta_theta = 0.01;
  double eta_sigma = 0.1;
  Preconditioner preconditioner = Preconditioner::kNone;
  /// When false the weight and activity dynamics use unit variances; the
  /// variances are still estimated.
  bool precision_weighting = true;
  VarianceSharing variance_sharing = VarianceSharing::kPerUnit;

  /// Throws ArgumentError when a rate is not positive or eta_sigma > 1.
  void validate() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Per-parameter Adadelta accumulators, one matrix per weight block.
struct AdadeltaState {
  std::vector<Matrix> acc_grad_sq;
  std::vector<Matrix> acc_update_sq;
  double rho = 0.95;
  double eps_hat = 1e-6;

  static AdadeltaState for_network(const PcNetwork& network, double rho = 0.95,
                                   double eps_hat = 1e-6);
};

/// Adadelta increment for one block. `loss_gradient` is dF/dtheta (the
/// ascent direction); the returned step always opposes it.
Matrix adadelta_update(const Matrix& loss_gradient, Matrix& acc_grad_sq,
                       Matrix& acc_update_sq, double rho, double eps_hat);

/// One synchronous activity update of every unclamped layer, from the errors
/// currently stored in the network. Recomputes the errors afterwards.
void step_activities(PcNetwork& network, const Schedule& schedule);

/// theta_l += eta_theta * weight_gradient(l) for every weight block.
void step_weights_sgd(PcNetwork& network, const Schedule& schedule, bool precision_on);

/// Adadelta on every weight block; `learning_rate` scales the step (1 is the
/// original algorithm).
void step_weights_adadelta(PcNetwork& network, AdadeltaState& state, bool precision_on,
                           double learning_rate = 1.0);

void step_variances(PcNetwork& network, const Schedule& schedule);

/// Settings for presenting one sample.
struct Presentation {
  WeightOptimizer optimizer = WeightOptimizer::kSgd;
  /// Only read when optimizer is kAdadelta.
  AdadeltaState* adadelta = nullptr;
  double adadelta_learning_rate = 1.0;
  /// Rate of the inverted-dropout mask applied to every top-down prediction;
  /// one mask per layer is drawn per presentation.
  double prediction_dropout = 0.0;
  Rng* rng = nullptr;
  /// Initial top activity when no target is clamped (zeros when empty).
  Vector top_init;
  bool learn = true;
};

struct InferenceReport {
  /// F right after clamping and the top-down initialisation.
  double initial_free_energy = 0.0;
  /// F after the activity updates, before any learning.
  double settled_free_energy = 0.0;
};

/// Clamps `observation` to the bottom layer and `target` (when given) to the
/// top layer, initialises the free layers by a top-down pass, runs
/// `t_activity` activity updates and then the scheduled weight and variance
/// updates (unless `presentation.learn` is false). Throws ShapeError on
/// width mismatches.
InferenceReport run_inference(PcNetwork& network, const Vector& observation,
                              const std::optional<Vector>& target, const Schedule& schedule,
                              const Presentation& presentation);

}  // namespace pcn

#endif  // PCN_TRAIN_HPP
