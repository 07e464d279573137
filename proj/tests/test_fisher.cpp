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
#include "pcn/error.hpp"
#include "pcn/fisher.hpp"
#include "pcn/rng.hpp"
#include "test_support.hpp"

using namespace pcn;
using pcn::testing::vec;

namespace {

PcNetwork linear_pair(std::size_t below, std::size_t above, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t widths[] = {below, above};
  const Activation acts[] = {Activation::kIdentity};
  return PcNetwork(widths, acts, rng);
}

}  // namespace

TEST_CASE("analytic activity Fisher is the precision") {
  const Matrix f = analytic_fisher_activity(vec({1.0, 2.0, 4.0}));
  CHECK(f(0, 0) == 1.0);
  CHECK(f(1, 1) == 0.5);
  CHECK(f(2, 2) == 0.25);
  CHECK(f(0, 1) == 0.0);
}

TEST_CASE("analytic weight Fisher scales the sample covariance by the precision") {
  const std::vector<Vector> samples = {vec({1.0, 0.0}), vec({-1.0, 0.0}), vec({0.0, 2.0}),
                                       vec({0.0, -2.0})};
  // Sample covariance: diag(2/3, 8/3).
  const Matrix f = analytic_fisher_weights(vec({2.0}), samples);
  REQUIRE(f.rows() == 2);
  CHECK(f(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(f(1, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(f(0, 1) == doctest::Approx(0.0));
  const std::vector<Vector> one = {vec({1.0})};
  CHECK_THROWS_AS(analytic_fisher_weights(vec({1.0}), one), ArgumentError);
}

TEST_CASE("scalar activity Fisher at variance 2 is one half") {
  PcNetwork net = linear_pair(1, 1, 1);
  net.layer(0).sigma[0] = 2.0;
  const FisherReport r = empirical_fisher(net, {ParameterSelector::Kind::kActivity, 0}, {},
                                          100000, 42);
  CHECK(r.empirical(0, 0) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.relative_error < 0.05);
  CHECK(r.sample_count == 100000);
}

TEST_CASE("Monte-Carlo error shrinks with the sample count") {
  PcNetwork net = linear_pair(3, 2, 2);
  net.layer(0).sigma = vec({1.0, 2.0, 4.0});
  const ParameterSelector sel{ParameterSelector::Kind::kWeights, 0};
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    small += empirical_fisher(net, sel, {}, 1000, seed).relative_error;
    large += empirical_fisher(net, sel, {}, 64000, seed).relative_error;
  }
  // A factor of 64 in samples should cut the error by about 8; require 3.
  CHECK(large * 3.0 < small);
}

TEST_CASE("the score has zero mean under the model") {
  PcNetwork net = linear_pair(2, 2, 9);
  net.layer(0).sigma = vec({0.5, 3.0});
  Rng rng(17);
  const int n = 20000;
  Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vector above = vec({rng.normal(), rng.normal()});
    Vector obs = net.layer(0).theta * above;
    for (Eigen::Index j = 0; j < 2; ++j) obs[j] += std::sqrt(net.layer(0).sigma[j]) * rng.normal();
    net.clamp(1, above);
    net.clamp(0, obs);
    compute_errors(net);
    const Vector s = score(net, {ParameterSelector::Kind::kActivity, 0});
    sum += s;
    sum_sq += s.array().square().matrix();
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    CHECK(std::abs(mean) < 4.0 * se);
  }
}

TEST_CASE("empirical Fisher rejects unsupported requests") {
  PcNetwork net = linear_pair(2, 2, 1);
  const ParameterSelector top{ParameterSelector::Kind::kActivity, 1};
  CHECK_THROWS_AS(empirical_fisher(net, top, {}, 5000, 1), ArgumentError);
  CHECK_THROWS_WITH_AS(
      empirical_fisher(net, {ParameterSelector::Kind::kActivity, 0}, {}, 10, 1),
      doctest::Contains("at least 1000"), ArgumentError);
  net.layer(0).activation = Activation::kTanh;
  CHECK_THROWS_WITH_AS(
      empirical_fisher(net, {ParameterSelector::Kind::kActivity, 0}, {}, 5000, 1),
      doctest::Contains("nonlinear"), ArgumentError);
}

TEST_CASE("selectors parse and print") {
  const ParameterSelector s = ParameterSelector::parse("weights:3");
  CHECK(s.kind == ParameterSelector::Kind::kWeights);
  CHECK(s.layer == 3);
  CHECK(s.to_string() == "weights:3");
  CHECK_THROWS_AS(ParameterSelector::parse("weights"), ArgumentError);
  CHECK_THROWS_AS(ParameterSelector::parse("bias:0"), ArgumentError);
  CHECK_THROWS_AS(ParameterSelector::parse("activity:x"), ArgumentError);
}
