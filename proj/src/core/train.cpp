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

#include "pcn/train.hpp"

#include <cmath>

#include "pcn/data.hpp"
#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

std::string to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::kNone:
      return "none";
    case Preconditioner::kPrecision:
      return "precision";
    case Preconditioner::kCovariance:
      return "covariance";
  }
  return "unknown";
}

Preconditioner parse_preconditioner(const std::string& name) {
  if (name == "none") return Preconditioner::kNone;
  if (name == "precision") return Preconditioner::kPrecision;
  if (name == "covariance") return Preconditioner::kCovariance;
  throw ArgumentError("unknown preconditioner '" + name +
                      "' (expected none|precision|covariance)");
}

std::string to_string(WeightOptimizer o) {
  return o == WeightOptimizer::kAdadelta ? "adadelta" : "sgd";
}

WeightOptimizer parse_weight_optimizer(const std::string& name) {
  if (name == "sgd") return WeightOptimizer::kSgd;
  if (name == "adadelta") return WeightOptimizer::kAdadelta;
  throw ArgumentError("unknown optimizer '" + name + "' (expected sgd|adadelta)");
}

void Schedule::validate() const {
  if (!(eta_mu > 0.0)) throw ArgumentError("eta_mu must be > 0");
  if (!(eta_theta > 0.0)) throw ArgumentError("eta_theta must be > 0");
  if (!(eta_sigma > 0.0 && eta_sigma <= 1.0)) throw ArgumentError("eta_sigma must lie in (0, 1]");
}

AdadeltaState AdadeltaState::for_network(const PcNetwork& network, double rho, double eps_hat) {
  AdadeltaState state;
  state.rho = rho;
  state.eps_hat = eps_hat;
  for (std::size_t l = 0; l < network.top(); ++l) {
    const Matrix& theta = network.layer(l).theta;
    state.acc_grad_sq.push_back(Matrix::Zero(theta.rows(), theta.cols()));
    state.acc_update_sq.push_back(Matrix::Zero(theta.rows(), theta.cols()));
  }
  return state;
}

Matrix adadelta_update(const Matrix& loss_gradient, Matrix& acc_grad_sq, Matrix& acc_update_sq,
                       double rho, double eps_hat) {
  acc_grad_sq.array() = rho * acc_grad_sq.array() + (1.0 - rho) * loss_gradient.array().square();
  Matrix delta = (-(acc_update_sq.array() + eps_hat).sqrt() / (acc_grad_sq.array() + eps_hat).sqrt() *
                  loss_gradient.array())
                     .matrix();
  acc_update_sq.array() = rho * acc_update_sq.array() + (1.0 - rho) * delta.array().square();
  return delta;
}

namespace {

// Per-unit factor of the extra preconditioner for a layer. The top layer has
// no variance of its own; it borrows the mean variance of the layer below,
// the only precision that reaches it.
Vector preconditioning(const PcNetwork& network, std::size_t l, Preconditioner p,
                       bool precision_on) {
  const LayerState& layer = network.layer(l);
  if (p == Preconditioner::kNone || !precision_on) return Vector::Ones(layer.mu.size());
  Vector sigma = layer.sigma;
  if (!layer.has_prediction()) {
    if (l == 0) return Vector::Ones(layer.mu.size());
    sigma = Vector::Constant(layer.mu.size(), network.layer(l - 1).sigma.mean());
  }
  if (p == Preconditioner::kPrecision) return (1.0 / sigma.array()).matrix();
  return sigma;
}

}  // namespace

void step_activities(PcNetwork& network, const Schedule& schedule) {
  std::vector<Vector> directions(network.num_layers());
  for (std::size_t l = 0; l < network.num_layers(); ++l) {
    const LayerState& layer = network.layer(l);
    if (layer.clamped) continue;
    directions[l] = activity_gradient(network, l, schedule.precision_weighting);
    directions[l].array() *=
        preconditioning(network, l, schedule.preconditioner, schedule.precision_weighting)
            .array();
  }
  for (std::size_t l = 0; l < network.num_layers(); ++l) {
    LayerState& layer = network.layer(l);
    if (!layer.clamped) layer.mu += schedule.eta_mu * directions[l];
  }
  compute_errors(network);
}

void step_weights_sgd(PcNetwork& network, const Schedule& schedule, bool precision_on) {
  for (std::size_t l = 0; l < network.top(); ++l) {
    Matrix g = weight_gradient(network, l, precision_on);
    const Vector scale = preconditioning(network, l, schedule.preconditioner, precision_on);
    g = scale.asDiagonal() * g;
    network.layer(l).theta += schedule.eta_theta * g;
  }
}

void step_weights_adadelta(PcNetwork& network, AdadeltaState& state, bool precision_on,
                           double learning_rate) {
  if (state.acc_grad_sq.size() != network.top()) {
    throw ShapeError("adadelta state has " + std::to_string(state.acc_grad_sq.size()) +
                     " blocks, network has " + std::to_string(network.top()));
  }
  for (std::size_t l = 0; l < network.top(); ++l) {
    Matrix& theta = network.layer(l).theta;
    if (state.acc_grad_sq[l].rows() != theta.rows() || state.acc_grad_sq[l].cols() != theta.cols()) {
      throw ShapeError("adadelta state block " + std::to_string(l) + " does not match theta");
    }
    // weight_gradient is the descent direction, i.e. -dF/dtheta up to scale.
    const Matrix loss_gradient = -weight_gradient(network, l, precision_on);
    theta += learning_rate * adadelta_update(loss_gradient, state.acc_grad_sq[l],
                                             state.acc_update_sq[l], state.rho, state.eps_hat);
  }
}

void step_variances(PcNetwork& network, const Schedule& schedule) {
  for (std::size_t l = 0; l < network.top(); ++l) {
    LayerState& layer = network.layer(l);
    layer.sigma = variance_step(layer.epsilon, layer.sigma, schedule.eta_sigma,
                                schedule.variance_sharing);
  }
}

InferenceReport run_inference(PcNetwork& network, const Vector& observation,
                              const std::optional<Vector>& target, const Schedule& schedule,
                              const Presentation& presentation) {
  const std::size_t top = network.top();
  if (static_cast<std::size_t>(observation.size()) != network.layer(0).width()) {
    throw ShapeError("observation has width " + std::to_string(observation.size()) +
                     ", input layer has " + std::to_string(network.layer(0).width()));
  }
  network.clamp(0, observation);
  if (target) {
    if (static_cast<std::size_t>(target->size()) != network.layer(top).width()) {
      throw ShapeError("target has width " + std::to_string(target->size()) +
                       ", top layer has " + std::to_string(network.layer(top).width()));
    }
    network.clamp(top, *target);
  } else {
    network.unclamp(top);
    LayerState& top_layer = network.layer(top);
    if (presentation.top_init.size() == 0) {
      top_layer.mu.setZero();
    } else if (presentation.top_init.size() == top_layer.mu.size()) {
      top_layer.mu = presentation.top_init;
    } else {
      throw ShapeError("top_init has width " + std::to_string(presentation.top_init.size()));
    }
  }
  for (std::size_t l = 1; l < top; ++l) network.unclamp(l);

  for (std::size_t l = 0; l < top; ++l) {
    LayerState& layer = network.layer(l);
    if (presentation.prediction_dropout > 0.0) {
      if (presentation.rng == nullptr) {
        throw ArgumentError("prediction dropout requested without a random stream");
      }
      layer.dropout_mask =
          dropout_mask(layer.width(), presentation.prediction_dropout, *presentation.rng);
    } else {
      layer.dropout_mask.resize(0);
    }
  }
  network.predict_down();
  // predict_down ignores masks; apply them to the initial free activities too.
  for (std::size_t l = 1; l < top; ++l) {
    LayerState& layer = network.layer(l);
    if (layer.dropout_mask.size() > 0) layer.mu.array() *= layer.dropout_mask.array();
  }

  InferenceReport report;
  compute_errors(network);
  report.initial_free_energy = free_energy(network);
  for (std::size_t t = 0; t < schedule.t_activity; ++t) step_activities(network, schedule);
  report.settled_free_energy = free_energy(network);

  if (presentation.learn) {
    // Variances see the settled errors; the weight steps then use the
    // refreshed precision.
    for (std::size_t k = 0; k < schedule.variance_updates_per_sample; ++k) {
      step_variances(network, schedule);
    }
    for (std::size_t k = 0; k < schedule.weight_updates_per_sample; ++k) {
      if (presentation.optimizer == WeightOptimizer::kAdadelta) {
        if (presentation.adadelta == nullptr) {
          throw ArgumentError("adadelta optimizer requested without optimizer state");
        }
        step_weights_adadelta(network, *presentation.adadelta, schedule.precision_weighting,
                              presentation.adadelta_learning_rate);
      } else {
        step_weights_sgd(network, schedule, schedule.precision_weighting);
      }
      compute_errors(network);
    }
  }
  for (std::size_t l = 0; l < top; ++l) network.layer(l).dropout_mask.resize(0);
  return report;
}

}  // namespace pcn
