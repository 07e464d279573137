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
#include <optional>
#include <vector>

#include "doctest.h"
#include "pcn/error.hpp"
#include "pcn/rng.hpp"
#include "pcn/train.hpp"
#include "test_support.hpp"

using namespace pcn;
using pcn::testing::vec;

namespace {

PcNetwork make(std::initializer_list<std::size_t> w, Activation a, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::size_t> widths(w);
  const std::vector<Activation> acts(widths.size() - 1, a);
  return PcNetwork(widths, acts, rng);
}

bool same_state(const PcNetwork& a, const PcNetwork& b) {
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    const LayerState& x = a.layer(l);
    const LayerState& y = b.layer(l);
    if (x.mu != y.mu || x.sigma != y.sigma || x.theta != y.theta) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("adadelta first step from zero accumulators") {
  Matrix g(1, 1);
  g << 2.0;
  Matrix eg = Matrix::Zero(1, 1), ex = Matrix::Zero(1, 1);
  const Matrix d = adadelta_update(g, eg, ex, 0.95, 1e-6);
  // E[g^2] = 0.05 * 4 = 0.2, step = -sqrt(1e-6) / sqrt(0.2 + 1e-6) * 2.
  const double expected = -std::sqrt(1e-6) / std::sqrt(0.2 + 1e-6) * 2.0;
  CHECK(d(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(d(0, 0) == doctest::Approx(-4.47e-3).epsilon(1e-3));
  CHECK(eg(0, 0) == doctest::Approx(0.2));
  CHECK(ex(0, 0) == doctest::Approx(0.05 * expected * expected));
}

TEST_CASE("adadelta always steps against the loss gradient") {
  Rng rng(4);
  Matrix eg = Matrix::Zero(3, 4), ex = Matrix::Zero(3, 4);
  for (int t = 0; t < 500; ++t) {
    Matrix g(3, 4);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = 10.0 * rng.normal();
    const Matrix d = adadelta_update(g, eg, ex, 0.9, 1e-6);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      CHECK(d.data()[i] * g.data()[i] <= 0.0);
    }
  }
}

TEST_CASE("SGD on a scalar pair follows the closed-form contraction") {
  // mu0 = 5 and mu1 = 2.5 clamped; theta moves by eta * eps * mu1 / sigma with
  // eps = 5 - 2.5 theta, so theta_t = 2 + (theta_0 - 2) (1 - 6.25 eta / sigma)^t.
  PcNetwork net = make({1, 1}, Activation::kIdentity, 1);
  net.clamp(0, vec({5.0}));
  net.clamp(1, vec({2.5}));
  net.layer(0).theta(0, 0) = 0.5;
  net.layer(0).sigma[0] = 2.0;
  Schedule s;
  s.eta_theta = 0.01;
  for (int t = 1; t <= 200; ++t) {
    compute_errors(net);
    step_weights_sgd(net, s, true);
    const double expected = 2.0 + (0.5 - 2.0) * std::pow(1.0 - 6.25 * 0.01 / 2.0, t);
    REQUIRE(net.layer(0).theta(0, 0) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("adadelta learns the scalar weight") {
  PcNetwork net = make({1, 1}, Activation::kIdentity, 1);
  net.clamp(0, vec({5.0}));
  net.clamp(1, vec({2.5}));
  net.layer(0).theta(0, 0) = 0.0;
  AdadeltaState state = AdadeltaState::for_network(net);
  for (int t = 0; t < 20000; ++t) {
    compute_errors(net);
    step_weights_adadelta(net, state, true);
  }
  CHECK(net.layer(0).theta(0, 0) == doctest::Approx(2.0).epsilon(1e-3));
  AdadeltaState wrong = AdadeltaState::for_network(make({2, 2, 2}, Activation::kIdentity, 1));
  CHECK_THROWS_AS(step_weights_adadelta(net, wrong, true), ShapeError);
}

TEST_CASE("inference never moves clamped layers") {
  PcNetwork net = make({6, 4, 3}, Activation::kTanh, 2);
  Rng rng(8);
  const Vector obs = vec({0.1, -0.2, 0.3, 0.9, -1.0, 0.0});
  const Vector target = vec({0.0, 1.0, 0.0});
  Schedule s;
  s.t_activity = 50;
  Presentation p;
  p.prediction_dropout = 0.3;
  p.rng = &rng;
  run_inference(net, obs, target, s, p);
  CHECK(net.layer(0).mu == obs);
  CHECK(net.layer(2).mu == target);
  CHECK(net.layer(0).clamped);
  CHECK(net.layer(2).clamped);
}

TEST_CASE("unit variances reproduce plain predictive coding bitwise") {
  PcNetwork a = make({5, 4, 3}, Activation::kTanh, 3);
  PcNetwork b = a;
  const Vector obs = vec({0.5, -0.5, 1.0, 0.0, 0.25});
  Schedule on;
  on.t_activity = 20;
  on.preconditioner = Preconditioner::kPrecision;
  Schedule off = on;
  off.precision_weighting = false;
  Presentation p;
  p.learn = false;
  run_inference(a, obs, std::nullopt, on, p);
  run_inference(b, obs, std::nullopt, off, p);
  CHECK(same_state(a, b));
  step_weights_sgd(a, on, true);
  step_weights_sgd(b, off, false);
  CHECK(same_state(a, b));
}

TEST_CASE("more activity steps never raise the settled free energy") {
  PcNetwork base = make({8, 6, 4}, Activation::kIdentity, 5);
  base.layer(0).sigma = Vector::Constant(8, 0.5);
  base.layer(1).sigma = Vector::Constant(6, 2.0);
  Rng rng(6);
  Vector obs(8);
  for (Eigen::Index i = 0; i < 8; ++i) obs[i] = rng.normal();
  Presentation p;
  p.learn = false;
  p.top_init = vec({0.5, -0.5, 1.0, 0.0});
  double previous = 0.0;
  for (std::size_t t : {0, 1, 2, 5, 10, 20, 50}) {
    PcNetwork net = base;
    Schedule s;
    s.t_activity = t;
    s.eta_mu = 0.05;
    const InferenceReport r = run_inference(net, obs, std::nullopt, s, p);
    if (t > 0) CHECK(r.settled_free_energy <= previous + 1e-12);
    previous = r.settled_free_energy;
  }
}

TEST_CASE("the same seed gives the same trajectory") {
  auto run = [] {
    PcNetwork net = make({6, 5, 3}, Activation::kTanh, 9);
    Rng rng(10);
    AdadeltaState state = AdadeltaState::for_network(net);
    Schedule s;
    Presentation p;
    p.optimizer = WeightOptimizer::kAdadelta;
    p.adadelta = &state;
    p.prediction_dropout = 0.2;
    p.rng = &rng;
    for (int i = 0; i < 30; ++i) {
      Vector obs(6);
      for (Eigen::Index k = 0; k < 6; ++k) obs[k] = rng.normal();
      run_inference(net, obs, vec({1.0, 0.0, 0.0}), s, p);
    }
    return net;
  };
  CHECK(same_state(run(), run()));
}

TEST_CASE("variance updates respect the floor") {
  PcNetwork net = make({3, 2}, Activation::kIdentity, 1);
  net.clamp(1, vec({0.0, 0.0}));
  net.clamp(0, vec({0.0, 0.0, 0.0}));
  Schedule s;
  s.eta_sigma = 1.0;
  for (int i = 0; i < 5; ++i) {
    compute_errors(net);
    step_variances(net, s);
  }
  CHECK(net.layer(0).sigma == Vector::Constant(3, kSigmaFloor));
}

TEST_CASE("run_inference argument checks") {
  PcNetwork net = make({3, 2}, Activation::kIdentity, 1);
  Schedule s;
  Presentation p;
  CHECK_THROWS_WITH_AS(run_inference(net, vec({1.0}), std::nullopt, s, p),
                       doctest::Contains("observation has width 1"), ShapeError);
  CHECK_THROWS_AS(run_inference(net, vec({1.0, 2.0, 3.0}), vec({1.0}), s, p), ShapeError);
  p.prediction_dropout = 0.5;
  CHECK_THROWS_AS(run_inference(net, vec({1.0, 2.0, 3.0}), std::nullopt, s, p), ArgumentError);
  p.prediction_dropout = 0.0;
  p.optimizer = WeightOptimizer::kAdadelta;
  CHECK_THROWS_AS(run_inference(net, vec({1.0, 2.0, 3.0}), std::nullopt, s, p), ArgumentError);
}

TEST_CASE("schedule validation and names") {
  Schedule s;
  CHECK_NOTHROW(s.validate());
  s.eta_sigma = 1.5;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  s = {};
  s.eta_mu = 0.0;
  CHECK_THROWS_AS(s.validate(), ArgumentError);
  for (auto p : {Preconditioner::kNone, Preconditioner::kPrecision, Preconditioner::kCovariance}) {
    CHECK(parse_preconditioner(to_string(p)) == p);
  }
  CHECK(parse_weight_optimizer("adadelta") == WeightOptimizer::kAdadelta);
  CHECK_THROWS_AS(parse_weight_optimizer("adam"), ArgumentError);
}
