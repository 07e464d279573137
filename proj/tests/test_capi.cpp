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


// Exercises the shared library through its C interface only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcn/pcn.h"

namespace {

struct Net {
  pcn_network* p = nullptr;
  ~Net() { pcn_network_destroy(p); }
};

}  // namespace

TEST_CASE("create, inspect and destroy a network") {
  const size_t widths[] = {3, 2};
  const char* acts[] = {"identity"};
  Net net;
  REQUIRE(pcn_network_create(widths, 2, acts, 7, &net.p) == PCN_OK);
  size_t n = 0, w = 0;
  CHECK(pcn_network_num_layers(net.p, &n) == PCN_OK);
  CHECK(n == 2);
  CHECK(pcn_network_width(net.p, 0, &w) == PCN_OK);
  CHECK(w == 3);
  double sigma[3];
  CHECK(pcn_network_get_sigma(net.p, 0, sigma, 3) == PCN_OK);
  CHECK(sigma[0] == 1.0);
  CHECK(std::strlen(pcn_version()) > 0);
}

TEST_CASE("free energy and gradients of a scalar pair") {
  const size_t widths[] = {1, 1};
  const char* acts[] = {"identity"};
  Net net;
  REQUIRE(pcn_network_create(widths, 2, acts, 1, &net.p) == PCN_OK);
  const double theta = 2.0, mu1 = 2.5, mu0 = 6.0;
  REQUIRE(pcn_network_set_theta(net.p, 0, &theta, 1) == PCN_OK);
  REQUIRE(pcn_network_set_mu(net.p, 1, &mu1, 1) == PCN_OK);
  REQUIRE(pcn_network_clamp(net.p, 0, &mu0, 1) == PCN_OK);
  REQUIRE(pcn_network_compute_errors(net.p) == PCN_OK);
  double eps = 0.0, f = 0.0, g = 0.0;
  CHECK(pcn_network_get_epsilon(net.p, 0, &eps, 1) == PCN_OK);
  CHECK(eps == doctest::Approx(1.0));
  CHECK(pcn_network_free_energy(net.p, &f) == PCN_OK);
  CHECK(f == doctest::Approx(1.0 + std::log(2.0 * M_PI)));
  CHECK(pcn_network_weight_gradient(net.p, 0, &g, 1) == PCN_OK);
  CHECK(g == doctest::Approx(2.5));
  CHECK(pcn_network_activity_gradient(net.p, 1, &g, 1) == PCN_OK);
  CHECK(g == doctest::Approx(2.0));

  CHECK(pcn_network_step_activities(net.p, 0.1) == PCN_OK);
  double after = 0.0;
  pcn_network_get_mu(net.p, 0, &after, 1);
  CHECK(after == 6.0);
  CHECK(pcn_network_step_variances(net.p, 1.0) == PCN_OK);
}

TEST_CASE("errors come back as status codes with messages") {
  const size_t widths[] = {3, 2};
  const char* acts[] = {"identity"};
  const char* bad_acts[] = {"relu"};
  Net net;
  CHECK(pcn_network_create(widths, 2, bad_acts, 1, &net.p) == PCN_ERR_ARGUMENT);
  CHECK(net.p == nullptr);
  CHECK(std::string(pcn_last_error()).find("relu") != std::string::npos);
  CHECK(pcn_network_create(widths, 1, acts, 1, &net.p) == PCN_ERR_ARGUMENT);
  CHECK(pcn_network_create(nullptr, 2, acts, 1, &net.p) == PCN_ERR_ARGUMENT);

  REQUIRE(pcn_network_create(widths, 2, acts, 1, &net.p) == PCN_OK);
  CHECK(std::string(pcn_last_error()).empty());
  double buf[4];
  CHECK(pcn_network_get_mu(net.p, 0, buf, 4) == PCN_ERR_SHAPE);
  CHECK(pcn_network_get_mu(net.p, 5, buf, 3) == PCN_ERR_ARGUMENT);
  const double tiny[] = {1.0, 0.0, 1.0};
  CHECK(pcn_network_set_sigma(net.p, 0, tiny, 3) == PCN_ERR_ARGUMENT);
  CHECK(std::string(pcn_last_error()).find("floor") != std::string::npos);
  CHECK(pcn_network_clamp(net.p, 0, tiny, 3) == PCN_OK);
  CHECK(pcn_network_set_mu(net.p, 0, tiny, 3) == PCN_ERR_ARGUMENT);
  CHECK(pcn_network_unclamp(net.p, 0) == PCN_OK);
  CHECK(pcn_network_set_mu(net.p, 0, tiny, 3) == PCN_OK);
  CHECK(pcn_network_step_variances(net.p, 1.5) == PCN_ERR_ARGUMENT);
  CHECK(pcn_network_num_layers(nullptr, nullptr) == PCN_ERR_ARGUMENT);
}

TEST_CASE("config resolution reports the offending field") {
  char* json = nullptr;
  REQUIRE(pcn_config_resolve("gradcheck", nullptr, &json) == PCN_OK);
  CHECK(std::string(json).find("\"networks\": 100") != std::string::npos);
  pcn_string_free(json);

  CHECK(pcn_config_resolve("gradcheck", R"({"run": {"networks": 0}})", &json) ==
        PCN_ERR_CONFIG);
  CHECK(json == nullptr);
  CHECK(std::string(pcn_last_error_field()) == "run.networks");
  CHECK(pcn_config_resolve("nonsense", nullptr, &json) == PCN_ERR_CONFIG);
  CHECK(std::string(pcn_last_error_field()) == "experiment");
}

TEST_CASE("run an experiment and read its metrics") {
  const auto dir = std::filesystem::temp_directory_path() / "pcn_capi_run";
  const std::string cfg =
      R"({"run": {"networks": 3}, "output": {"out_dir": ")" + dir.string() + R"("}})";
  pcn_result* result = nullptr;
  REQUIRE(pcn_run("gradcheck", cfg.c_str(), &result) == PCN_OK);
  double pass = 0.0, missing = 0.0;
  CHECK(pcn_result_metric(result, "pass", &pass) == PCN_OK);
  CHECK(pass == 1.0);
  CHECK(pcn_result_metric(result, "no_such_metric", &missing) == PCN_ERR_ARGUMENT);
  CHECK(std::string(pcn_result_summary_json(result)).find("\"config_hash\"") != std::string::npos);
  CHECK(std::string(pcn_result_out_dir(result)) == dir.string());
  CHECK(pcn_result_wall_seconds(result) >= 0.0);
  pcn_result_destroy(result);
  std::filesystem::remove_all(dir);

  CHECK(pcn_run("mnist-classify", R"({"data": {"mnist_dir": "/nonexistent"}})", &result) ==
        PCN_ERR_DATA);
  CHECK(result == nullptr);
}
