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

#include "pcn/fisher.hpp"

#include <cmath>

#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

ParameterSelector ParameterSelector::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ArgumentError("selector '" + text + "' must look like activity:<l> or weights:<l>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string index = text.substr(colon + 1);
  ParameterSelector sel;
  if (kind == "activity") {
    sel.kind = Kind::kActivity;
  } else if (kind == "weights") {
    sel.kind = Kind::kWeights;
  } else {
    throw ArgumentError("unknown selector kind '" + kind + "'");
  }
  if (index.empty() || index.find_first_not_of("0123456789") != std::string::npos) {
    throw ArgumentError("selector '" + text + "' has a bad layer index");
  }
  sel.layer = std::stoul(index);
  return sel;
}

std::string ParameterSelector::to_string() const {
  return (kind == Kind::kActivity ? "activity:" : "weights:") + std::to_string(layer);
}

Vector score(const PcNetwork& network, const ParameterSelector& wrt) {
  if (wrt.layer >= network.num_layers()) {
    throw ArgumentError("selector " + wrt.to_string() + " names a layer out of range");
  }
  if (wrt.kind == ParameterSelector::Kind::kActivity) {
    return activity_descent(neighbor_view(network, wrt.layer));
  }
  if (wrt.layer == network.top()) {
    throw ArgumentError("selector " + wrt.to_string() + ": the top layer has no weights");
  }
  const Matrix g = weight_gradient(network, wrt.layer);
  Vector flat(g.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), g.rows(), g.cols()) = g;
  return flat;
}

Matrix analytic_fisher_activity(const Vector& sigma) {
  return (1.0 / sigma.array()).matrix().asDiagonal();
}

Matrix analytic_fisher_weights(const Vector& sigma_l, std::span<const Vector> mu_above_samples) {
  if (mu_above_samples.size() < 2) {
    throw ArgumentError("analytic_fisher_weights: need at least 2 samples, got " +
                        std::to_string(mu_above_samples.size()));
  }
  const Eigen::Index d = mu_above_samples.front().size();
  Vector mean = Vector::Zero(d);
  for (const auto& s : mu_above_samples) {
    if (s.size() != d) throw ShapeError("analytic_fisher_weights: ragged samples");
    mean += s;
  }
  mean /= static_cast<double>(mu_above_samples.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& s : mu_above_samples) {
    const Vector c = s - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(mu_above_samples.size() - 1);

  const Eigen::Index n = sigma_l.size();
  Matrix fisher = Matrix::Zero(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    fisher.block(i * d, i * d, d, d) = cov / sigma_l[i];
  }
  return fisher;
}

FisherReport empirical_fisher(const PcNetwork& network, const ParameterSelector& wrt,
                              const NoiseSpec& noise, std::size_t samples, std::uint64_t seed) {
  noise.validate();
  if (samples < 1000) {
    throw ArgumentError("empirical_fisher: need at least 1000 samples, got " +
                        std::to_string(samples));
  }
  if (wrt.layer >= network.top()) {
    throw ArgumentError("empirical_fisher: selector " + wrt.to_string() +
                        " must name a layer that receives a prediction");
  }
  for (std::size_t l = 0; l < network.top(); ++l) {
    if (network.layer(l).activation != Activation::kIdentity) {
      throw ArgumentError(
          "empirical_fisher: layer " + std::to_string(l) +
          " is nonlinear; the closed-form Fisher of activities and weights holds for "
          "linear predictions f(theta mu) = theta mu only");
    }
  }

  // The selected layer and the one above it, as a stand-alone generative pair.
  const LayerState& source = network.layer(wrt.layer);
  const std::size_t below_width = source.width();
  const std::size_t above_width = network.layer(wrt.layer + 1).width();
  const std::size_t widths[] = {below_width, above_width};
  const Activation acts[] = {Activation::kIdentity};
  Rng init(seed);
  PcNetwork pair(widths, acts, init);
  pair.layer(0).theta = source.theta;
  pair.layer(0).sigma = source.sigma;
  const ParameterSelector local{wrt.kind, 0};

  const double prior_var = noise.target_noise_var > 0.0 ? noise.target_noise_var : 1.0;
  const Vector obs_sd = noise.input_noise_var > 0.0
                            ? Vector::Constant(source.sigma.size(), std::sqrt(noise.input_noise_var))
                            : Vector(source.sigma.array().sqrt().matrix());

  const Rng root(seed);
  const Eigen::Index dim = wrt.kind == ParameterSelector::Kind::kActivity
                               ? static_cast<Eigen::Index>(below_width)
                               : static_cast<Eigen::Index>(below_width * above_width);
  Matrix accum = Matrix::Zero(dim, dim);
  std::vector<Vector> above_samples;
  above_samples.reserve(samples);

  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = root.substream("fisher-sample", i);
    Vector above(static_cast<Eigen::Index>(above_width));
    for (Eigen::Index j = 0; j < above.size(); ++j) above[j] = rng.normal(0.0, prior_var);
    Vector obs = source.theta * above;
    for (Eigen::Index j = 0; j < obs.size(); ++j) obs[j] += obs_sd[j] * rng.normal();

    pair.clamp(1, above);
    pair.clamp(0, obs);
    compute_errors(pair);
    const Vector s = score(pair, local);
    accum.selfadjointView<Eigen::Lower>().rankUpdate(s);
    above_samples.push_back(std::move(above));
  }
  const Matrix symmetric = accum.selfadjointView<Eigen::Lower>();

  FisherReport report;
  report.sample_count = samples;
  report.empirical = symmetric / static_cast<double>(samples);
  report.analytic = wrt.kind == ParameterSelector::Kind::kActivity
                        ? analytic_fisher_activity(source.sigma)
                        : analytic_fisher_weights(source.sigma, above_samples);
  const double denom = report.analytic.norm();
  const double diff = (report.empirical - report.analytic).norm();
  report.relative_error = denom > 0.0 ? diff / denom : diff;
  return report;
}

}  // namespace pcn
