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
#include <numbers>

#include "doctest.h"
#include "pcn/error.hpp"
#include "pcn/network.hpp"
#include "pcn/rng.hpp"
#include "test_support.hpp"

using namespace pcn;
using pcn::testing::fd_activity;
using pcn::testing::fd_weights;
using pcn::testing::random_network;
using pcn::testing::relative_error;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Two scalar layers: mu0 predicted by theta * mu1.
PcNetwork scalar_chain(double mu0, double theta, double mu1, double sigma0 = 1.0) {
  Rng rng(1);
  const std::size_t widths[] = {1, 1};
  const Activation acts[] = {Activation::kIdentity};
  PcNetwork net(widths, acts, rng);
  net.layer(0).mu[0] = mu0;
  net.layer(0).theta(0, 0) = theta;
  net.layer(0).sigma[0] = sigma0;
  net.layer(1).mu[0] = mu1;
  return net;
}

}  // namespace

TEST_CASE("predict") {
  Matrix theta(1, 1);
  theta << 2.0;
  CHECK(predict(vec({2.5}), theta, Activation::kIdentity)[0] == 5.0);

  const Vector mu = vec({1.0, -1.0, 0.0});
  CHECK(predict(mu, Matrix::Identity(3, 3), Activation::kIdentity) == mu);

  Matrix row(1, 2);
  row << 1.0, 1.0;
  // tanh(7) = 0.99999833..., evaluated by hand from (e^14 - 1) / (e^14 + 1).
  const double e14 = std::exp(14.0);
  CHECK(predict(vec({3.0, 4.0}), row, Activation::kTanh)[0] ==
        doctest::Approx((e14 - 1.0) / (e14 + 1.0)).epsilon(1e-15));
  CHECK(predict(vec({3.0, 4.0}), row, Activation::kTanh)[0] == doctest::Approx(0.999998).epsilon(1e-6));
}

TEST_CASE("predict rejects mismatched shapes and names both") {
  Matrix theta(2, 3);
  theta.setZero();
  try {
    predict(vec({1.0, 2.0}), theta, Activation::kIdentity);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("2x3") != std::string::npos);
    CHECK(what.find("length 2") != std::string::npos);
  }
}

TEST_CASE("compute_errors") {
  SUBCASE("perfect prediction") {
    PcNetwork net = scalar_chain(5.0, 1.0, 5.0);
    CHECK(compute_errors(net)[0][0] == 0.0);
  }
  SUBCASE("5 - 3") {
    PcNetwork net = scalar_chain(5.0, 1.0, 3.0);
    const auto errors = compute_errors(net);
    CHECK(errors[0][0] == 2.0);
    CHECK(net.layer(0).epsilon[0] == 2.0);
    CHECK(errors[1].size() == 0);
    CHECK(net.layer(1).epsilon.size() == 0);
  }
  SUBCASE("deterministic") {
    Rng rng(3);
    PcNetwork net = random_network(rng, Activation::kTanh);
    const auto first = compute_errors(net);
    const auto second = compute_errors(net);
    for (std::size_t l = 0; l < first.size(); ++l) CHECK(first[l] == second[l]);
  }
}

TEST_CASE("free_energy") {
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  SUBCASE("zero error") {
    PcNetwork net = scalar_chain(0.0, 1.0, 0.0);
    compute_errors(net);
    CHECK(free_energy(net) == doctest::Approx(1.837877).epsilon(1e-6));
  }
  SUBCASE("eps 2, sigma 2") {
    PcNetwork net = scalar_chain(2.0, 0.0, 0.0, 2.0);
    compute_errors(net);
    CHECK(free_energy(net) == doctest::Approx(4.531024).epsilon(1e-6));
  }
  SUBCASE("all errors zero leaves only the log terms") {
    Rng rng(11);
    PcNetwork net = random_network(rng, Activation::kIdentity);
    net.layer(net.top()).mu.setZero();
    for (std::size_t l = 0; l < net.top(); ++l) net.layer(l).mu.setZero();
    compute_errors(net);
    double expected = 0.0;
    for (std::size_t l = 0; l < net.top(); ++l) {
      expected += (log_2pi + net.layer(l).sigma.array().log()).sum();
    }
    CHECK(free_energy(net) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("strictly increasing in eps^2") {
    PcNetwork net = scalar_chain(0.0, 1.0, 0.0, 1.5);
    double last = -1e300;
    for (double mu0 : {0.0, 0.5, -1.0, 2.0, -3.5}) {
      net.layer(0).mu[0] = mu0;
      compute_errors(net);
      const double f = free_energy(net);
      CHECK(f > last);
      last = f;
    }
  }
  SUBCASE("non-finite term names layer and unit") {
    PcNetwork net = scalar_chain(0.0, 1.0, 0.0);
    compute_errors(net);
    net.layer(0).epsilon[0] = std::numeric_limits<double>::infinity();
    try {
      free_energy(net);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("layer 0, unit 0") != std::string::npos);
    }
  }
}

TEST_CASE("activity_gradient") {
  SUBCASE("fixed point") {
    Rng rng(5);
    PcNetwork net = random_network(rng, Activation::kTanh);
    net.layer(net.top()).mu.setRandom();
    net.predict_down();
    compute_errors(net);
    for (std::size_t l = 1; l < net.num_layers(); ++l) {
      CHECK(activity_gradient(net, l).isZero(0.0));
    }
    for (std::size_t l = 0; l < net.top(); ++l) CHECK(weight_gradient(net, l).isZero(0.0));
  }
  SUBCASE("single below-error term") {
    PcNetwork net = scalar_chain(5.0, 1.0, 3.0);
    compute_errors(net);
    CHECK(activity_gradient(net, 1)[0] == 2.0);
  }
  SUBCASE("clamped layer") {
    PcNetwork net = scalar_chain(5.0, 1.0, 3.0);
    net.clamp(0, vec({5.0}));
    compute_errors(net);
    CHECK_THROWS_AS(activity_gradient(net, 0), ArgumentError);
  }
}

TEST_CASE("weight_gradient") {
  SUBCASE("zero error gives zero matrix") {
    PcNetwork net = scalar_chain(3.0, 1.0, 3.0);
    compute_errors(net);
    CHECK(weight_gradient(net, 0)(0, 0) == 0.0);
  }
  SUBCASE("scalar outer product") {
    // eps = 2, mu_above = 3, sigma = 1.
    PcNetwork net = scalar_chain(5.0, 1.0, 3.0);
    compute_errors(net);
    CHECK(weight_gradient(net, 0)(0, 0) == 6.0);
  }
  SUBCASE("top layer has no weights") {
    PcNetwork net = scalar_chain(5.0, 1.0, 3.0);
    compute_errors(net);
    CHECK_THROWS_AS(weight_gradient(net, 1), ArgumentError);
  }
}

TEST_CASE("gradients match central differences of F/2") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Activation act = trial % 2 == 0 ? Activation::kIdentity : Activation::kTanh;
    PcNetwork net = random_network(rng, act);
    compute_errors(net);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const Vector analytic = activity_descent(neighbor_view(net, l));
      worst = std::max(worst, relative_error(analytic, -0.5 * fd_activity(net, l)));
    }
    for (std::size_t l = 0; l < net.top(); ++l) {
      worst = std::max(worst, relative_error(weight_gradient(net, l), -0.5 * fd_weights(net, l)));
    }
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("a small activity step never increases F") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    PcNetwork net = random_network(rng, Activation::kIdentity);
    net.clamp(0, net.layer(0).mu);
    compute_errors(net);
    const double before = free_energy(net);
    std::vector<Vector> dirs(net.num_layers());
    for (std::size_t l = 1; l < net.num_layers(); ++l) dirs[l] = activity_gradient(net, l);
    for (std::size_t l = 1; l < net.num_layers(); ++l) net.layer(l).mu += 1e-4 * dirs[l];
    compute_errors(net);
    CHECK(free_energy(net) <= before);
    CHECK(net.layer(0).mu == net.layer(0).mu);
  }
}

TEST_CASE("unit variances reduce to unweighted errors exactly") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    PcNetwork net = random_network(rng, Activation::kTanh);
    for (std::size_t l = 0; l < net.num_layers(); ++l) net.layer(l).sigma.setOnes();
    compute_errors(net);
    for (std::size_t l = 1; l < net.num_layers(); ++l) {
      CHECK(activity_gradient(net, l, true) == activity_gradient(net, l, false));
    }
    for (std::size_t l = 0; l < net.top(); ++l) {
      CHECK(weight_gradient(net, l, true) == weight_gradient(net, l, false));
    }
  }
}

TEST_CASE("activity dynamics read only neighbouring layers") {
  Rng rng(99);
  const std::size_t widths[] = {4, 5, 6, 3, 2};
  const Activation acts[] = {Activation::kTanh, Activation::kTanh, Activation::kIdentity,
                             Activation::kTanh};
  PcNetwork net(widths, acts, rng);
  for (std::size_t l = 0; l < net.num_layers(); ++l) net.layer(l).mu.setRandom();
  compute_errors(net);
  const Vector before = activity_gradient(net, 2);
  // Layers two or more steps away, including their errors.
  net.layer(0).theta.setRandom();
  net.layer(0).epsilon.setRandom();
  net.layer(0).sigma.setConstant(3.0);
  net.layer(4).mu.setRandom();
  net.layer(3).theta.setRandom();
  CHECK(activity_gradient(net, 2) == before);
}

TEST_CASE("construction and validation") {
  Rng rng(4);
  const std::size_t widths[] = {3, 2};
  const Activation acts[] = {Activation::kIdentity};
  PcNetwork net(widths, acts, rng);
  CHECK(net.layer(0).theta.rows() == 3);
  CHECK(net.layer(0).theta.cols() == 2);
  CHECK(net.layer(0).theta.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(2.0));
  CHECK(net.layer(1).theta.size() == 0);
  CHECK_NOTHROW(net.validate());
  net.layer(0).theta.resize(2, 2);
  CHECK_THROWS_AS(net.validate(), ShapeError);

  const Activation too_many[] = {Activation::kIdentity, Activation::kTanh};
  CHECK_THROWS_AS(PcNetwork(widths, too_many, rng), ShapeError);
  CHECK_THROWS_AS(parse_activation("relu"), ArgumentError);
}

TEST_CASE("clamped layers survive predict_down") {
  Rng rng(6);
  PcNetwork net = random_network(rng, Activation::kTanh);
  const Vector data = Vector::Constant(static_cast<Eigen::Index>(net.layer(0).width()), 0.25);
  net.clamp(0, data);
  net.predict_down();
  CHECK(net.layer(0).mu == data);
}
