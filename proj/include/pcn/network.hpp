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

#ifndef PCN_NETWORK_HPP
#define PCN_NETWORK_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pcn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lower bound applied to every variance after each update.
inline constexpr double kSigmaFloor = 1e-6;

enum class Activation { kIdentity, kTanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

Vector activate(Activation a, const Vector& drive);
/// Elementwise f'(drive); 1 for identity, 1 - tanh^2 for tanh.
Vector activation_derivative(Activation a, const Vector& drive);

/// One level of the hierarchy.
///
/// `theta` maps the activities of the layer above onto a prediction of this
/// layer's activities (rows = width of this layer, cols = width above). The
/// top layer has an empty `theta` and an empty `epsilon`: nothing predicts it.
/// `drive` caches theta * mu_above from the last error computation and
/// `dropout_mask`, when non-empty, multiplies the top-down prediction.
struct LayerState {
  Vector mu;
  Vector epsilon;
  Vector sigma;
  Matrix theta;
  Activation activation = Activation::kIdentity;
  bool clamped = false;

  Vector drive;
  Vector dropout_mask;

  std::size_t width() const { return static_cast<std::size_t>(mu.size()); }
  bool has_prediction() const { return theta.rows() > 0; }
};

struct Rates {
  double eta_mu = 0.1;
  double eta_theta = 0.01;
  double eta_sigma = 0.1;
};

class Rng;

/// Ordered stack of layers; index 0 is the observation layer, the last index
/// is the top latent (or label) layer.
class PcNetwork {
 public:
  PcNetwork() = default;

  /// Builds a network of the given widths. `activations[l]` is the
  /// nonlinearity of the prediction of layer l, so there is one fewer
  /// activation than widths. Weights are uniform in +-1/sqrt(fan_in), all
  /// activities start at zero and all variances at one.
  PcNetwork(std::span<const std::size_t> widths,
            std::span<const Activation> activations, Rng& rng);

  std::size_t num_layers() const { return layers_.size(); }
  std::size_t top() const { return layers_.size() - 1; }

  LayerState& layer(std::size_t l);
  const LayerState& layer(std::size_t l) const;

  std::vector<std::size_t> widths() const;

  Rates rates;

  /// Pins layer `l` to `value`; a clamped layer is never moved by inference.
  void clamp(std::size_t l, const Vector& value);
  void unclamp(std::size_t l);

  /// Overwrites every unclamped layer below the top with its top-down
  /// prediction, walking from the top down.
  void predict_down();

  /// Checks the structural invariants; throws ShapeError on violation.
  void validate() const;

 private:
  std::vector<LayerState> layers_;
};

/// f(theta * above). Throws ShapeError naming both shapes on mismatch.
Vector predict(const Vector& above, const Matrix& theta, Activation activation);

/// epsilon_l = mu_l - mask * f(theta_l * mu_{l+1}) for every layer below the
/// top. Stores the errors (and drives) in the layers and returns a copy.
std::vector<Vector> compute_errors(PcNetwork& network);

/// F = sum over predicted layers and units of eps^2 / sigma + ln(2 pi sigma).
/// Uses the errors stored by the last `compute_errors`.
double free_energy(const PcNetwork& network);

/// Read-only view of a layer and its immediate neighbours. Activity dynamics
/// are computed from this view alone, which keeps the update local.
struct NeighborView {
  const LayerState* below = nullptr;
  const LayerState& self;
};

NeighborView neighbor_view(const PcNetwork& network, std::size_t l);

/// Descent direction of the activities of the viewed layer:
///   W_{l-1}^T (g_{l-1} . eps_{l-1} / sigma_{l-1}) - eps_l / sigma_l
/// where g is the masked activation derivative. This is -(1/2) dF/dmu.
/// With `precision_weighted` false every sigma is treated as one.
Vector activity_descent(const NeighborView& view, bool precision_weighted = true);

/// Descent direction for the activities of layer `l`; throws ArgumentError
/// for clamped layers.
Vector activity_gradient(const PcNetwork& network, std::size_t l,
                         bool precision_weighted = true);

/// Descent direction for theta_l: (g_l . eps_l / sigma_l) mu_{l+1}^T,
/// i.e. -(1/2) dF/dtheta_l.
Matrix weight_gradient(const PcNetwork& network, std::size_t l,
                       bool precision_weighted = true);

}  // namespace pcn

#endif  // PCN_NETWORK_HPP
