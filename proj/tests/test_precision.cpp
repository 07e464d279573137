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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "pcn/data.hpp"
#include "pcn/error.hpp"
#include "pcn/precision.hpp"
#include "pcn/rng.hpp"
#include "test_support.hpp"

using namespace pcn;
using pcn::testing::vec;

TEST_CASE("precision-weighted error divides by the variance") {
  const Vector e = precision_weighted_error(vec({2.0, -3.0}), vec({4.0, 0.5}));
  CHECK(e[0] == doctest::Approx(0.5));
  CHECK(e[1] == doctest::Approx(-6.0));
  CHECK_THROWS_AS(precision_weighted_error(vec({1.0}), vec({1.0, 1.0})), ShapeError);
}

TEST_CASE("variance step examples") {
  // sigma + eta (eps^2 - sigma) = 1 + 0.1 (9 - 1)
  CHECK(variance_step(vec({3.0}), vec({1.0}), 0.1)[0] == doctest::Approx(1.8));
  // Perfect prediction drives the variance towards zero but never below the floor.
  Vector s = vec({1e-6});
  s = variance_step(vec({0.0}), s, 1.0);
  CHECK(s[0] == kSigmaFloor);
  s = variance_step(vec({0.0}), vec({0.5}), 1.0);
  CHECK(s[0] == kSigmaFloor);
}

TEST_CASE("variance step fixed point is the squared error") {
  const Vector eps = vec({1.5, -0.5, 2.0});
  const Vector sq = eps.array().square().matrix();
  CHECK(variance_step(eps, sq, 0.3) == sq);
}

TEST_CASE("tied sharing averages the squared error over the layer") {
  const Vector s = variance_step(vec({1.0, 3.0}), vec({1.0, 1.0}), 1.0, VarianceSharing::kTied);
  CHECK(s[0] == doctest::Approx(5.0));
  CHECK(s[1] == doctest::Approx(5.0));
}

TEST_CASE("variance step never leaves the floor on adversarial input") {
  Rng rng(7);
  Vector sigma = Vector::Constant(8, 1.0);
  for (int t = 0; t < 2000; ++t) {
    Vector eps(8);
    for (Eigen::Index i = 0; i < 8; ++i) eps[i] = (t % 3 == 0) ? 0.0 : 1e-9 * rng.normal();
    sigma = variance_step(eps, sigma, 1.0);
    CHECK(sigma.minCoeff() >= kSigmaFloor);
  }
}

TEST_CASE("variance estimate tracks the closed-form expectation") {
  // With eps ~ N(0, v) the mean estimate after t steps is v + (s0 - v)(1 - eta)^t.
  const double v = 3.0, s0 = 1.0, eta = 0.1;
  const int chains = 4000;
  Rng rng(11);
  for (int t : {1, 5, 20, 60}) {
    std::vector<double> finals;
    for (int c = 0; c < chains; ++c) {
      Vector s = vec({s0});
      for (int k = 0; k < t; ++k) s = variance_step(vec({std::sqrt(v) * rng.normal()}), s, eta);
      finals.push_back(s[0]);
    }
    double mean = 0.0;
    for (double x : finals) mean += x;
    mean /= chains;
    double var = 0.0;
    for (double x : finals) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (chains - 1) / chains);
    const double expected = v + (s0 - v) * std::pow(1.0 - eta, t);
    CAPTURE(t);
    CHECK(std::abs(mean - expected) < 3.0 * se);
  }
}

TEST_CASE("fixed-posterior estimation recovers the stream variance") {
  Rng rng(3);
  const std::size_t widths[] = {1, 1};
  const Activation acts[] = {Activation::kIdentity};
  PcNetwork net(widths, acts, rng);
  net.layer(1).mu[0] = 0.0;
  const auto stream = constant_signal_stream(0.0, 4.0, 4000, rng);
  VarianceEstimationOptions options;
  options.eta_sigma = 0.01;
  const auto trace =
      run_variance_estimation(net, stream, VarianceMode::kFixedPosterior, 4000, options, rng);
  double tail = 0.0;
  int n = 0;
  for (const auto& r : trace) {
    if (r.layer == 0 && r.step > 2000) {
      tail += r.value;
      ++n;
    }
  }
  CHECK(tail / n == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("variance estimation records one sigma per layer and step") {
  Rng rng(5);
  const std::size_t widths[] = {3, 2, 1};
  const Activation acts[] = {Activation::kIdentity, Activation::kIdentity};
  PcNetwork net(widths, acts, rng);
  const auto stream = constant_signal_stream(0.0, 1.0, 10, rng);
  std::vector<Vector> wide;
  for (const auto& x : stream) wide.push_back(Vector::Constant(3, x[0]));
  const auto trace =
      run_variance_estimation(net, wide, VarianceMode::kFixedPrediction, 10, {}, rng);
  CHECK(trace.size() == 11 * 2);
  CHECK(trace.front().quantity == "sigma");
  CHECK_THROWS_AS(
      run_variance_estimation(net, std::span<const Vector>{}, VarianceMode::kJoint, 1, {}, rng),
      ArgumentError);
}

TEST_CASE("mode and sharing names round-trip") {
  for (auto m : {VarianceMode::kFixedPosterior, VarianceMode::kFixedPrediction,
                 VarianceMode::kJoint}) {
    CHECK(parse_variance_mode(to_string(m)) == m);
  }
  CHECK(parse_variance_sharing("tied") == VarianceSharing::kTied);
  CHECK_THROWS_WITH_AS(parse_variance_sharing("per-unit"), doctest::Contains("per_unit|tied"),
                       ArgumentError);
}
