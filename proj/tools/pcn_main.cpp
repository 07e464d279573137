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

// pcn: run predictive coding experiments and diagnostics.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or data
// error (including a failed gradient check).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcn/pcn.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::string> mnist_dir;
};

const char* const kCommands[][2] = {
    {"variance-estimation", "infer the variance of a noisy constant signal"},
    {"weights-learning", "learn a scalar weight with and without precision weighting"},
    {"mnist-classify", "train a generative classifier on MNIST"},
    {"mnist-reconstruct", "compare prior and posterior MNIST reconstructions"},
    {"autoencode", "unsupervised hierarchical autoencoder with embedding export"},
    {"fisher-check", "compare Monte-Carlo and closed-form Fisher information"},
    {"gradcheck", "check analytic gradients against finite differences"},
};

// Builds the config document: file first, then flags on top.
nlohmann::json compose(const std::string& command, const Options& opt) {
  nlohmann::json doc = nlohmann::json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + opt.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(opt.config_path + ": malformed JSON: " + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument(opt.config_path + ": not a JSON object");
  }
  if (!doc.contains("experiment")) doc["experiment"] = command;
  auto section = [&doc](const char* name) -> nlohmann::json& {
    if (!doc.contains(name) || !doc[name].is_object()) doc[name] = nlohmann::json::object();
    return doc[name];
  };
  if (opt.seed) doc["seed"] = *opt.seed;
  if (opt.out_dir) section("output")["out_dir"] = *opt.out_dir;
  if (opt.format) section("output")["format"] = *opt.format;
  if (opt.mnist_dir) {
    section("data")["mnist_dir"] = *opt.mnist_dir;
  } else if (const char* env = std::getenv("PCN_MNIST_DIR"); env != nullptr && *env != '\0') {
    nlohmann::json& data = section("data");
    if (!data.contains("mnist_dir") || data["mnist_dir"] == "") data["mnist_dir"] = env;
  }
  return doc;
}

std::string headline(const std::string& command, const nlohmann::json& summary) {
  const auto& m = summary["metrics"];
  auto get = [&m](const char* key) { return m.contains(key) ? m[key].get<double>() : 0.0; };
  char buf[512];
  if (command == "gradcheck") {
    std::snprintf(buf, sizeof buf, "max relative error %.3g over %.0f networks: %s",
                  get("max_relative_error"), get("networks"),
                  get("pass") > 0.5 ? "PASS" : "FAIL");
  } else if (command == "variance-estimation") {
    std::snprintf(buf, sizeof buf, "sigma_input fixed_posterior %.4g, fixed_prediction %.4g",
                  get("fixed_posterior.sigma_input"), get("fixed_prediction.sigma_input"));
  } else if (command == "weights-learning") {
    std::snprintf(buf, sizeof buf,
                  "theta %.4g sigma %.4g (clean), theta %.4g sigma %.4g (target noise); "
                  "final theta std %.3g with precision, %.3g without",
                  get("clean_precision.theta_mean"), get("clean_precision.sigma_mean"),
                  get("noisy_precision.theta_mean"), get("noisy_precision.sigma_mean"),
                  get("noisy_precision.theta_final_std"), get("noisy_plain.theta_final_std"));
  } else if (command == "mnist-classify") {
    std::snprintf(buf, sizeof buf, "test accuracy %.4f on %.0f digits", get("accuracy"),
                  get("test_samples"));
  } else if (command == "mnist-reconstruct") {
    std::snprintf(buf, sizeof buf,
                  "posterior beats prior on %.1f%% of digits, input sigma %.4g",
                  100.0 * get("posterior_win_fraction"), get("sigma_input_mean"));
  } else if (command == "autoencode") {
    std::snprintf(buf, sizeof buf, "reconstruction mse %.4g (mean image %.4g), 5-NN %.4f",
                  get("mse_layer_1"), get("mse_mean_image"), get("knn_accuracy"));
  } else {
    std::snprintf(buf, sizeof buf, "relative error activity %.3g, weights %.3g",
                  get("activity.relative_error"), get("weights.relative_error"));
  }
  return buf;
}

int run(const std::string& command, const Options& opt) {
  nlohmann::json doc;
  try {
    doc = compose(command, opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "pcn: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "pcn: " << e.what() << "\n";
    return kExitConfig;
  }

  pcn_result* result = nullptr;
  const std::string text = doc.dump();
  const pcn_status status = pcn_run(command.c_str(), text.c_str(), &result);
  if (status != PCN_OK) {
    if (status == PCN_ERR_CONFIG) {
      std::cerr << "pcn: config error in '" << pcn_last_error_field() << "': "
                << pcn_last_error() << "\n";
      return kExitConfig;
    }
    std::cerr << "pcn: error: " << pcn_last_error() << "\n";
    return kExitRuntime;
  }
  const auto summary = nlohmann::json::parse(pcn_result_summary_json(result));
  std::printf("%s: %s [%.1f s, %s]\n", command.c_str(), headline(command, summary).c_str(),
              pcn_result_wall_seconds(result), pcn_result_out_dir(result));
  const bool failed_check =
      command == "gradcheck" && summary["metrics"].value("pass", 0.0) < 0.5;
  pcn_result_destroy(result);
  return failed_check ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive coding networks with learned precision", "pcn"};
  app.require_subcommand(1);
  Options opt;
  std::string chosen;
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "root random seed (u64)");
    sub->add_option("--out-dir", opt.out_dir, "directory for outputs");
    sub->add_option("--format", opt.format, "trace format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--mnist-dir", opt.mnist_dir,
                    "directory holding the MNIST IDX files (default $PCN_MNIST_DIR)");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }

  if (argc < 2) {
    std::cout << app.help();
    return kExitConfig;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  return run(chosen, opt);
}
