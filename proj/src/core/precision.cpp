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

#include "pcn/precision.hpp"

#include "pcn/data.hpp"
#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

std::string to_string(VarianceMode mode) {
  switch (mode) {
    case VarianceMode::kFixedPosterior:
      return "fixed_posterior";
    case VarianceMode::kFixedPrediction:
      return "fixed_prediction";
    case VarianceMode::kJoint:
      return "joint";
  }
  return "unknown";
}

VarianceMode parse_variance_mode(const std::string& name) {
  if (name == "fixed_posterior") return VarianceMode::kFixedPosterior;
  if (name == "fixed_prediction") return VarianceMode::kFixedPrediction;
  if (name == "joint") return VarianceMode::kJoint;
  throw ArgumentError("unknown variance mode '" + name +
                      "' (expected fixed_posterior|fixed_prediction|joint)");
}

std::string to_string(VarianceSharing sharing) {
  return sharing == VarianceSharing::kTied ? "tied" : "per_unit";
}

VarianceSharing parse_variance_sharing(const std::string& name) {
  if (name == "per_unit") return VarianceSharing::kPerUnit;
  if (name == "tied") return VarianceSharing::kTied;
  throw ArgumentError("unknown variance sharing '" + name + "' (expected per_unit|tied)");
}

Vector precision_weighted_error(const Vector& epsilon, const Vector& sigma) {
  if (epsilon.size() != sigma.size()) {
    throw ShapeError("precision_weighted_error: " + std::to_string(epsilon.size()) +
                     " errors vs " + std::to_string(sigma.size()) + " variances");
  }
  return (epsilon.array() / sigma.array()).matrix();
}

Vector variance_step(const Vector& epsilon, const Vector& sigma, double eta_sigma,
                     VarianceSharing sharing, double floor) {
  if (epsilon.size() != sigma.size()) {
    throw ShapeError("variance_step: " + std::to_string(epsilon.size()) + " errors vs " +
                     std::to_string(sigma.size()) + " variances");
  }
  Eigen::ArrayXd target = epsilon.array().square();
  if (sharing == VarianceSharing::kTied && target.size() > 0) {
    target.setConstant(target.mean());
  }
  Eigen::ArrayXd next = sigma.array() + eta_sigma * (target - sigma.array());
  return next.max(floor).matrix();
}

namespace {

void record_sigmas(const PcNetwork& net, std::size_t step, std::vector<TraceRecord>& out) {
  for (std::size_t l = 0; l < net.top(); ++l) {
    push_trace(out, step, l, "sigma", net.layer(l).sigma.mean());
  }
}

void update_variances(PcNetwork& net, const VarianceEstimationOptions& options) {
  for (std::size_t l = 0; l < net.top(); ++l) {
    LayerState& layer = net.layer(l);
    layer.sigma = variance_step(layer.epsilon, layer.sigma, options.eta_sigma,
                                options.sharing);
  }
}

}  // namespace

std::vector<TraceRecord> run_variance_estimation(PcNetwork& network,
                                                 std::span<const Vector> stream,
                                                 VarianceMode mode, std::size_t steps,
                                                 const VarianceEstimationOptions& options,
                                                 Rng& rng) {
  if (stream.empty()) throw ArgumentError("run_variance_estimation: empty observation stream");
  if (options.eta_sigma <= 0.0 || options.eta_sigma > 1.0) {
    throw ArgumentError("run_variance_estimation: eta_sigma must lie in (0, 1]");
  }
  network.validate();

  std::vector<TraceRecord> trace;
  record_sigmas(network, 0, trace);

  // Reused predictions for kFixedPrediction, computed from the state on entry.
  std::vector<Vector> fixed_predictions;
  if (mode == VarianceMode::kFixedPrediction) {
    for (std::size_t l = 0; l < network.top(); ++l) {
      const LayerState& layer = network.layer(l);
      fixed_predictions.push_back(
          predict(network.layer(l + 1).mu, layer.theta, layer.activation));
    }
  }

  for (std::size_t step = 1; step <= steps; ++step) {
    network.clamp(0, stream[(step - 1) % stream.size()]);

    switch (mode) {
      case VarianceMode::kFixedPosterior:
        compute_errors(network);
        break;
      case VarianceMode::kFixedPrediction:
        for (std::size_t l = 0; l < network.top(); ++l) {
          LayerState& layer = network.layer(l);
          Vector prediction = fixed_predictions[l];
          if (options.prediction_dropout > 0.0) {
            prediction.array() *=
                dropout_mask(layer.width(), options.prediction_dropout, rng).array();
          }
          layer.epsilon = layer.mu - prediction;
        }
        break;
      case VarianceMode::kJoint:
        for (std::size_t t = 0; t < options.activity_steps; ++t) {
          compute_errors(network);
          std::vector<Vector> directions(network.num_layers());
          for (std::size_t l = 0; l < network.num_layers(); ++l) {
            if (!network.layer(l).clamped) directions[l] = activity_gradient(network, l);
          }
          for (std::size_t l = 0; l < network.num_layers(); ++l) {
            if (!network.layer(l).clamped) network.layer(l).mu += options.eta_mu * directions[l];
          }
        }
        compute_errors(network);
        for (std::size_t l = 0; l < network.top(); ++l) {
          network.layer(l).theta += options.eta_theta * weight_gradient(network, l);
        }
        break;
    }

    update_variances(network, options);
    record_sigmas(network, step, trace);
  }
  return trace;
}

}  // namespace pcn
