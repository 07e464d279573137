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

#include "pcn/pcn.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "pcn/config.hpp"
#include "pcn/error.hpp"
#include "pcn/experiments.hpp"
#include "pcn/network.hpp"
#include "pcn/precision.hpp"
#include "pcn/rng.hpp"
#include "pcn/train.hpp"

struct pcn_network {
  pcn::PcNetwork net;
};

struct pcn_result {
  std::string summary;
  std::string out_dir;
  pcn::ExperimentResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_field;

pcn_status fail(pcn_status status, const std::string& message, const std::string& field = "") {
  g_last_error = message;
  g_last_field = field;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
pcn_status guarded(F&& body) {
  g_last_error.clear();
  g_last_field.clear();
  try {
    body();
    return PCN_OK;
  } catch (const pcn::ConfigError& e) {
    return fail(PCN_ERR_CONFIG, e.what(), e.field());
  } catch (const pcn::Error& e) {
    return fail(static_cast<pcn_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PCN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PCN_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw pcn::ArgumentError(std::string(what) + " is null");
}

const pcn::LayerState& layer_of(const pcn_network* net, std::size_t layer) {
  require(net, "network");
  if (layer >= net->net.num_layers()) {
    throw pcn::ArgumentError("layer " + std::to_string(layer) + " out of range (network has " +
                             std::to_string(net->net.num_layers()) + ")");
  }
  return net->net.layer(layer);
}

void check_len(std::size_t expected, std::size_t len, const char* what) {
  if (expected != len) {
    throw pcn::ShapeError(std::string(what) + " has " + std::to_string(expected) +
                          " entries, buffer has " + std::to_string(len));
  }
}

void copy_out(const pcn::Vector& v, double* out, std::size_t len, const char* what) {
  check_len(static_cast<std::size_t>(v.size()), len, what);
  if (len > 0) require(out, "output buffer");
  std::memcpy(out, v.data(), len * sizeof(double));
}

pcn::Vector copy_in(const double* values, std::size_t len) {
  if (len > 0) require(values, "input buffer");
  return Eigen::Map<const pcn::Vector>(values, static_cast<Eigen::Index>(len));
}

void copy_out_row_major(const pcn::Matrix& m, double* out, std::size_t len, const char* what) {
  check_len(static_cast<std::size_t>(m.size()), len, what);
  if (len > 0) require(out, "output buffer");
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out, m.rows(), m.cols()) = m;
}

pcn::ExperimentConfig resolve(const char* experiment, const char* config_json) {
  const std::string name = experiment == nullptr ? "" : experiment;
  const std::string text = config_json == nullptr ? "" : config_json;
  pcn::ExperimentConfig config =
      text.empty() ? pcn::default_config(name) : pcn::parse_config_text(text, name);
  config.validate();
  return config;
}

}  // namespace

extern "C" {

const char* pcn_version(void) { return "0.1.0"; }

const char* pcn_last_error(void) { return g_last_error.c_str(); }

const char* pcn_last_error_field(void) { return g_last_field.c_str(); }

pcn_status pcn_network_create(const size_t* widths, size_t num_layers,
                              const char* const* activations, uint64_t seed,
                              pcn_network** out) {
  return guarded([&] {
    require(widths, "widths");
    require(out, "out");
    *out = nullptr;
    if (num_layers < 2) throw pcn::ArgumentError("a network needs at least 2 layers");
    require(activations, "activations");
    std::vector<pcn::Activation> acts;
    for (std::size_t i = 0; i + 1 < num_layers; ++i) {
      require(activations[i], "activation name");
      acts.push_back(pcn::parse_activation(activations[i]));
    }
    pcn::Rng rng(seed);
    *out = new pcn_network{pcn::PcNetwork(std::span(widths, num_layers), acts, rng)};
  });
}

void pcn_network_destroy(pcn_network* net) { delete net; }

pcn_status pcn_network_num_layers(const pcn_network* net, size_t* out) {
  return guarded([&] {
    require(net, "network");
    require(out, "out");
    *out = net->net.num_layers();
  });
}

pcn_status pcn_network_width(const pcn_network* net, size_t layer, size_t* out) {
  return guarded([&] {
    require(out, "out");
    *out = layer_of(net, layer).width();
  });
}

pcn_status pcn_network_get_mu(const pcn_network* net, size_t layer, double* out, size_t len) {
  return guarded([&] { copy_out(layer_of(net, layer).mu, out, len, "mu"); });
}

pcn_status pcn_network_set_mu(pcn_network* net, size_t layer, const double* values,
                              size_t len) {
  return guarded([&] {
    const auto& state = layer_of(net, layer);
    check_len(state.width(), len, "mu");
    if (state.clamped) {
      throw pcn::ArgumentError("layer " + std::to_string(layer) +
                               " is clamped; unclamp it or clamp new values");
    }
    net->net.layer(layer).mu = copy_in(values, len);
  });
}

pcn_status pcn_network_get_sigma(const pcn_network* net, size_t layer, double* out,
                                 size_t len) {
  return guarded([&] { copy_out(layer_of(net, layer).sigma, out, len, "sigma"); });
}

pcn_status pcn_network_set_sigma(pcn_network* net, size_t layer, const double* values,
                                 size_t len) {
  return guarded([&] {
    check_len(layer_of(net, layer).width(), len, "sigma");
    pcn::Vector v = copy_in(values, len);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(v[i] >= pcn::kSigmaFloor)) {
        throw pcn::ArgumentError("sigma[" + std::to_string(i) + "] is below the floor 1e-6");
      }
    }
    net->net.layer(layer).sigma = std::move(v);
  });
}

pcn_status pcn_network_get_theta(const pcn_network* net, size_t layer, double* out,
                                 size_t len) {
  return guarded([&] { copy_out_row_major(layer_of(net, layer).theta, out, len, "theta"); });
}

pcn_status pcn_network_set_theta(pcn_network* net, size_t layer, const double* values,
                                 size_t len) {
  return guarded([&] {
    const auto& state = layer_of(net, layer);
    check_len(static_cast<std::size_t>(state.theta.size()), len, "theta");
    if (len > 0) require(values, "input buffer");
    net->net.layer(layer).theta =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            values, state.theta.rows(), state.theta.cols());
  });
}

pcn_status pcn_network_get_epsilon(const pcn_network* net, size_t layer, double* out,
                                   size_t len) {
  return guarded([&] { copy_out(layer_of(net, layer).epsilon, out, len, "epsilon"); });
}

pcn_status pcn_network_clamp(pcn_network* net, size_t layer, const double* values,
                             size_t len) {
  return guarded([&] {
    check_len(layer_of(net, layer).width(), len, "clamp values");
    net->net.clamp(layer, copy_in(values, len));
  });
}

pcn_status pcn_network_unclamp(pcn_network* net, size_t layer) {
  return guarded([&] {
    layer_of(net, layer);
    net->net.unclamp(layer);
  });
}

pcn_status pcn_network_compute_errors(pcn_network* net) {
  return guarded([&] {
    require(net, "network");
    pcn::compute_errors(net->net);
  });
}

pcn_status pcn_network_free_energy(const pcn_network* net, double* out) {
  return guarded([&] {
    require(net, "network");
    require(out, "out");
    *out = pcn::free_energy(net->net);
  });
}

pcn_status pcn_network_activity_gradient(const pcn_network* net, size_t layer, double* out,
                                         size_t len) {
  return guarded([&] {
    layer_of(net, layer);
    copy_out(pcn::activity_gradient(net->net, layer), out, len, "activity gradient");
  });
}

pcn_status pcn_network_weight_gradient(const pcn_network* net, size_t layer, double* out,
                                       size_t len) {
  return guarded([&] {
    layer_of(net, layer);
    copy_out_row_major(pcn::weight_gradient(net->net, layer), out, len, "weight gradient");
  });
}

pcn_status pcn_network_step_activities(pcn_network* net, double eta_mu) {
  return guarded([&] {
    require(net, "network");
    if (!(eta_mu > 0.0)) throw pcn::ArgumentError("eta_mu must be > 0");
    pcn::Schedule schedule;
    schedule.eta_mu = eta_mu;
    pcn::step_activities(net->net, schedule);
  });
}

pcn_status pcn_network_step_variances(pcn_network* net, double eta_sigma) {
  return guarded([&] {
    require(net, "network");
    if (!(eta_sigma > 0.0 && eta_sigma <= 1.0)) {
      throw pcn::ArgumentError("eta_sigma must lie in (0, 1]");
    }
    pcn::Schedule schedule;
    schedule.eta_sigma = eta_sigma;
    pcn::step_variances(net->net, schedule);
  });
}

pcn_status pcn_run(const char* experiment, const char* config_json, pcn_result** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const pcn::ExperimentConfig config = resolve(experiment, config_json);
    auto* result = new pcn_result;
    try {
      result->result = pcn::run_experiment(config);
      result->summary = pcn::summary_json(config, result->result);
      result->out_dir = config.out_dir;
    } catch (...) {
      delete result;
      throw;
    }
    *out = result;
  });
}

pcn_status pcn_config_resolve(const char* experiment, const char* config_json,
                              char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = nullptr;
    const std::string text = pcn::to_json(resolve(experiment, config_json)).dump(2);
    char* copy = new char[text.size() + 1];
    std::memcpy(copy, text.c_str(), text.size() + 1);
    *out_json = copy;
  });
}

void pcn_string_free(char* s) { delete[] s; }

const char* pcn_result_summary_json(const pcn_result* result) {
  return result == nullptr ? "" : result->summary.c_str();
}

const char* pcn_result_out_dir(const pcn_result* result) {
  return result == nullptr ? "" : result->out_dir.c_str();
}

double pcn_result_wall_seconds(const pcn_result* result) {
  return result == nullptr ? 0.0 : result->result.wall_seconds;
}

pcn_status pcn_result_metric(const pcn_result* result, const char* name, double* out) {
  return guarded([&] {
    require(result, "result");
    require(name, "name");
    require(out, "out");
    const auto it = result->result.metrics.find(name);
    if (it == result->result.metrics.end()) {
      throw pcn::ArgumentError(std::string("no metric named '") + name + "'");
    }
    *out = it->second;
  });
}

void pcn_result_destroy(pcn_result* result) { delete result; }

}  // extern "C"
