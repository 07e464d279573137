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

#include "pcn/network.hpp"

#include <cmath>
#include <numbers>

#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_index(const PcNetwork& net, std::size_t l) {
  if (l >= net.num_layers()) {
    throw ArgumentError("layer index " + std::to_string(l) + " out of range (" +
                        std::to_string(net.num_layers()) + " layers)");
  }
}

// Masked activation derivative of the prediction of `layer`.
Vector prediction_gain(const LayerState& layer) {
  Vector gain = activation_derivative(layer.activation, layer.drive);
  if (layer.dropout_mask.size() > 0) gain.array() *= layer.dropout_mask.array();
  return gain;
}

Vector weighted(const LayerState& layer, bool precision_weighted) {
  if (!precision_weighted) return layer.epsilon;
  return (layer.epsilon.array() / layer.sigma.array()).matrix();
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  throw ArgumentError("unknown activation '" + name + "' (expected identity|tanh)");
}

Vector activate(Activation a, const Vector& drive) {
  if (a == Activation::kTanh) return drive.array().tanh().matrix();
  return drive;
}

Vector activation_derivative(Activation a, const Vector& drive) {
  if (a == Activation::kTanh) {
    return (1.0 - drive.array().tanh().square()).matrix();
  }
  return Vector::Ones(drive.size());
}

PcNetwork::PcNetwork(std::span<const std::size_t> widths,
                     std::span<const Activation> activations, Rng& rng) {
  if (widths.size() < 2) throw ShapeError("a network needs at least two layers");
  if (activations.size() != widths.size() - 1) {
    throw ShapeError("expected " + std::to_string(widths.size() - 1) +
                     " activations, got " + std::to_string(activations.size()));
  }
  layers_.resize(widths.size());
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const auto n = static_cast<Eigen::Index>(widths[l]);
    if (n == 0) throw ShapeError("layer " + std::to_string(l) + " has zero width");
    LayerState& layer = layers_[l];
    layer.mu = Vector::Zero(n);
    layer.sigma = Vector::Ones(n);
    if (l + 1 < widths.size()) {
      const auto fan_in = static_cast<Eigen::Index>(widths[l + 1]);
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      layer.theta.resize(n, fan_in);
      // Column-major fill order is part of the reproducibility contract.
      for (Eigen::Index j = 0; j < fan_in; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          layer.theta(i, j) = bound * (2.0 * rng.uniform() - 1.0);
        }
      }
      layer.activation = activations[l];
      layer.epsilon = Vector::Zero(n);
      layer.drive = Vector::Zero(n);
    }
  }
}

LayerState& PcNetwork::layer(std::size_t l) {
  check_index(*this, l);
  return layers_[l];
}

const LayerState& PcNetwork::layer(std::size_t l) const {
  check_index(*this, l);
  return layers_[l];
}

std::vector<std::size_t> PcNetwork::widths() const {
  std::vector<std::size_t> w;
  w.reserve(layers_.size());
  for (const auto& layer : layers_) w.push_back(layer.width());
  return w;
}

void PcNetwork::clamp(std::size_t l, const Vector& value) {
  LayerState& layer = this->layer(l);
  if (value.size() != layer.mu.size()) {
    throw ShapeError("clamp of layer " + std::to_string(l) + ": expected width " +
                     std::to_string(layer.mu.size()) + ", got " +
                     std::to_string(value.size()));
  }
  layer.mu = value;
  layer.clamped = true;
}

void PcNetwork::unclamp(std::size_t l) { layer(l).clamped = false; }

void PcNetwork::predict_down() {
  for (std::size_t l = top(); l-- > 0;) {
    LayerState& layer = layers_[l];
    if (layer.clamped) continue;
    layer.mu = predict(layers_[l + 1].mu, layer.theta, layer.activation);
  }
}

void PcNetwork::validate() const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerState& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l) + ": ";
    if (layer.sigma.size() != layer.mu.size()) {
      throw ShapeError(where + "sigma length differs from mu length");
    }
    if ((layer.sigma.array() < kSigmaFloor).any()) {
      throw NumericError(where + "variance below floor");
    }
    if (l == top()) {
      if (layer.has_prediction()) throw ShapeError(where + "top layer has weights");
      continue;
    }
    if (layer.theta.rows() != layer.mu.size() ||
        layer.theta.cols() != layers_[l + 1].mu.size()) {
      throw ShapeError(where + "theta is " + shape(layer.theta) + ", expected " +
                       std::to_string(layer.mu.size()) + "x" +
                       std::to_string(layers_[l + 1].mu.size()));
    }
  }
}

Vector predict(const Vector& above, const Matrix& theta, Activation activation) {
  if (theta.cols() != above.size()) {
    throw ShapeError("predict: theta is " + shape(theta) + " but activity above has length " +
                     std::to_string(above.size()));
  }
  return activate(activation, theta * above);
}

std::vector<Vector> compute_errors(PcNetwork& network) {
  std::vector<Vector> errors(network.num_layers());
  for (std::size_t l = 0; l < network.top(); ++l) {
    LayerState& layer = network.layer(l);
    const Vector& above = network.layer(l + 1).mu;
    if (layer.theta.cols() != above.size() || layer.theta.rows() != layer.mu.size()) {
      throw ShapeError("compute_errors: layer " + std::to_string(l) + " theta is " +
                       shape(layer.theta) + ", activities are " +
                       std::to_string(layer.mu.size()) + " below and " +
                       std::to_string(above.size()) + " above");
    }
    layer.drive.noalias() = layer.theta * above;
    Vector prediction = activate(layer.activation, layer.drive);
    if (layer.dropout_mask.size() > 0) prediction.array() *= layer.dropout_mask.array();
    layer.epsilon = layer.mu - prediction;
    errors[l] = layer.epsilon;
  }
  network.layer(network.top()).epsilon.resize(0);
  return errors;
}

double free_energy(const PcNetwork& network) {
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (std::size_t l = 0; l < network.top(); ++l) {
    const LayerState& layer = network.layer(l);
    for (Eigen::Index i = 0; i < layer.epsilon.size(); ++i) {
      const double e = layer.epsilon[i];
      const double s = layer.sigma[i];
      const double term = e * e / s + log_2pi + std::log(s);
      if (!std::isfinite(term)) {
        throw NumericError("free_energy: non-finite term at layer " + std::to_string(l) +
                           ", unit " + std::to_string(i));
      }
      total += term;
    }
  }
  return total;
}

NeighborView neighbor_view(const PcNetwork& network, std::size_t l) {
  check_index(network, l);
  return NeighborView{l > 0 ? &network.layer(l - 1) : nullptr, network.layer(l)};
}

Vector activity_descent(const NeighborView& view, bool precision_weighted) {
  Vector direction = Vector::Zero(view.self.mu.size());
  if (view.self.has_prediction()) direction -= weighted(view.self, precision_weighted);
  if (view.below != nullptr) {
    const LayerState& below = *view.below;
    const Vector signal =
        (weighted(below, precision_weighted).array() * prediction_gain(below).array())
            .matrix();
    direction.noalias() += below.theta.transpose() * signal;
  }
  return direction;
}

Vector activity_gradient(const PcNetwork& network, std::size_t l, bool precision_weighted) {
  check_index(network, l);
  if (network.layer(l).clamped) {
    throw ArgumentError("activity_gradient: layer " + std::to_string(l) + " is clamped");
  }
  return activity_descent(neighbor_view(network, l), precision_weighted);
}

Matrix weight_gradient(const PcNetwork& network, std::size_t l, bool precision_weighted) {
  check_index(network, l);
  if (l == network.top()) {
    throw ArgumentError("weight_gradient: the top layer has no weights");
  }
  const LayerState& layer = network.layer(l);
  const Vector& above = network.layer(l + 1).mu;
  if (layer.epsilon.size() != layer.mu.size() || layer.theta.cols() != above.size()) {
    throw ShapeError("weight_gradient: layer " + std::to_string(l) +
                     " errors not computed for current shapes");
  }
  const Vector signal =
      (weighted(layer, precision_weighted).array() * prediction_gain(layer).array()).matrix();
  return signal * above.transpose();
}

}  // namespace pcn
