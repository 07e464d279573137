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

#include "pcn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "pcn/error.hpp"
#include "pcn/fisher.hpp"
#include "pcn/format.hpp"
#include "pcn/precision.hpp"
#include "pcn/rng.hpp"
#include "pcn/train.hpp"

namespace pcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kCheckpointEvery = 1000;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Sample standard deviation (n - 1).
double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

double mse(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / a.size(); }

PcNetwork build_network(const ExperimentConfig& config, Rng& init) {
  const auto acts = parsed_activations(config);
  return PcNetwork(config.widths, acts, init);
}

// ---------------------------------------------------------------- variance

// Seed-averaged sigma per (step, layer), in first-seen order.
class TraceAverager {
 public:
  void add(const std::vector<TraceRecord>& records) {
    if (sums_.empty()) {
      keys_ = records;
      sums_.assign(records.size(), 0.0);
    }
    if (records.size() != sums_.size()) throw ShapeError("ragged trace across seeds");
    for (std::size_t i = 0; i < records.size(); ++i) sums_[i] += records[i].value;
    ++count_;
  }

  std::vector<TraceRecord> mean() const {
    std::vector<TraceRecord> out = keys_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].value = sums_[i] / count_;
    return out;
  }

 private:
  std::vector<TraceRecord> keys_;
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

}  // namespace

ExperimentResult exp_variance_estimation(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const std::size_t first_averaged = config.steps - config.average_window + 1;

  for (VarianceMode mode : {VarianceMode::kFixedPosterior, VarianceMode::kFixedPrediction}) {
    TraceAverager averager;
    std::vector<double> per_seed;
    for (std::size_t s = 0; s < config.seeds; ++s) {
      const Rng root = Rng(config.seed).substream("variance-estimation", s);
      Rng init = root.substream("init");
      PcNetwork net = build_network(config, init);
      const std::size_t top = net.top();

      // A fixed latent cause; the free layers settle on the clean signal.
      Vector cause(static_cast<Eigen::Index>(net.layer(top).width()));
      for (Eigen::Index i = 0; i < cause.size(); ++i) cause[i] = init.normal();
      const Vector clean =
          Vector::Constant(static_cast<Eigen::Index>(net.layer(0).width()), config.signal_mean);
      Schedule settle = config.schedule;
      settle.precision_weighting = true;
      Presentation quiet;
      quiet.learn = false;
      run_inference(net, clean, cause, settle, quiet);

      Rng stream_rng = root.substream("stream");
      std::vector<Vector> stream;
      stream.reserve(config.steps);
      for (std::size_t t = 0; t < config.steps; ++t) {
        stream.push_back(add_gaussian_noise(clean, config.signal_variance, stream_rng));
      }

      VarianceEstimationOptions options;
      options.eta_sigma = config.schedule.eta_sigma;
      options.sharing = config.schedule.variance_sharing;
      options.prediction_dropout =
          mode == VarianceMode::kFixedPrediction ? config.noise.prediction_dropout : 0.0;
      Rng dropout_rng = root.substream("dropout");
      const auto trace =
          run_variance_estimation(net, stream, mode, config.steps, options, dropout_rng);
      averager.add(trace);

      double window_sum = 0.0;
      for (const auto& r : trace) {
        if (r.layer == 0 && r.step >= first_averaged) window_sum += r.value;
      }
      per_seed.push_back(window_sum / config.average_window);
    }
    const std::string tag = to_string(mode);
    result.trace_sets[mode == VarianceMode::kFixedPosterior ? "" : tag] = averager.mean();
    result.metrics[tag + ".sigma_input"] = mean_of(per_seed);
    result.metrics[tag + ".sigma_input_seed_std"] = stddev_of(per_seed);
  }
  return result;
}

// ------------------------------------------------------------ weights learning

ExperimentResult exp_weights_learning(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const std::size_t first_averaged = config.steps - config.average_window + 1;

  struct Condition {
    std::string tag;
    bool target_noise;
    bool precision;
  };
  const Condition conditions[] = {{"clean_precision", false, true},
                                  {"clean_plain", false, false},
                                  {"noisy_precision", true, true},
                                  {"noisy_plain", true, false}};

  for (const auto& cond : conditions) {
    const double target_var = cond.target_noise ? config.noise.target_noise_var : 0.0;
    Schedule schedule = config.schedule;
    schedule.precision_weighting = cond.precision;

    std::vector<double> theta_window, sigma_window, theta_final, sigma_final;
    std::vector<double> theta_sum(config.steps + 1, 0.0), sigma_sum(config.steps + 1, 0.0);
    for (std::size_t s = 0; s < config.seeds; ++s) {
      // Same streams with and without precision: the comparison is paired.
      const Rng root = Rng(config.seed).substream("weights-learning", s);
      Rng init = root.substream("init");
      PcNetwork net = build_network(config, init);
      Rng data = root.substream("data");
      Presentation presentation;
      const Vector target = Vector::Constant(1, config.target_value);

      double theta_acc = 0.0, sigma_acc = 0.0;
      theta_sum[0] += net.layer(0).theta(0, 0);
      sigma_sum[0] += net.layer(0).sigma[0];
      for (std::size_t t = 1; t <= config.steps; ++t) {
        const double x = data.normal(config.signal_mean, config.signal_variance);
        // Target noise perturbs the top-down prediction of the input,
        // eps = x - (theta * target + n). Subtracting n from the observation
        // yields the same error, so its variance adds to the input's.
        const double n = target_var > 0.0 ? data.normal(0.0, target_var) : 0.0;
        run_inference(net, Vector::Constant(1, x - n), target, schedule, presentation);
        const double theta = net.layer(0).theta(0, 0);
        const double sigma = net.layer(0).sigma[0];
        theta_sum[t] += theta;
        sigma_sum[t] += sigma;
        if (t >= first_averaged) {
          theta_acc += theta;
          sigma_acc += sigma;
        }
      }
      theta_window.push_back(theta_acc / config.average_window);
      sigma_window.push_back(sigma_acc / config.average_window);
      theta_final.push_back(net.layer(0).theta(0, 0));
      sigma_final.push_back(net.layer(0).sigma[0]);
    }

    std::vector<TraceRecord> trace;
    for (std::size_t t = 0; t <= config.steps; ++t) {
      push_trace(trace, t, 0, "theta", theta_sum[t] / config.seeds);
      push_trace(trace, t, 0, "sigma", sigma_sum[t] / config.seeds);
    }
    result.trace_sets[cond.tag == "clean_precision" ? "" : cond.tag] = std::move(trace);
    result.metrics[cond.tag + ".theta_mean"] = mean_of(theta_window);
    result.metrics[cond.tag + ".sigma_mean"] = mean_of(sigma_window);
    result.metrics[cond.tag + ".theta_final_std"] = stddev_of(theta_final);
    result.metrics[cond.tag + ".sigma_final_std"] = stddev_of(sigma_final);
  }
  return result;
}

// -------------------------------------------------------------------- MNIST

fs::path resolve_mnist_dir(const ExperimentConfig& config) {
  if (!config.mnist_dir.empty()) return config.mnist_dir;
  if (const char* env = std::getenv("PCN_MNIST_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "data/mnist";
}

Dataset load_mnist_split(const fs::path& dir, bool train) {
  const std::string prefix = train ? "train" : "t10k";
  return load_mnist_idx(dir / (prefix + "-images-idx3-ubyte"),
                        dir / (prefix + "-labels-idx1-ubyte"));
}

namespace {

struct MnistRun {
  PcNetwork net;
  AdadeltaState adadelta;
};

// Presents `limit` shuffled training samples per epoch. Labels are clamped
// to the top layer when `supervised`. Free energy and per-layer sigma are
// traced every kCheckpointEvery samples; `after_epoch` runs after each epoch.
void train_mnist(const ExperimentConfig& config, MnistRun& run, const Dataset& train,
                 bool supervised, std::vector<TraceRecord>& trace,
                 const std::function<void(std::size_t)>& after_epoch) {
  const WeightOptimizer optimizer = parsed_optimizer(config);
  const std::size_t limit = std::min(config.train_limit, train.count());
  std::vector<std::size_t> order(train.count());
  std::size_t seen = 0;
  double f_sum = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Rng root = Rng(config.seed).substream("mnist-epoch", epoch);
    Rng shuffle = root.substream("shuffle");
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.next_u64() % (i + 1)]);
    }
    Rng sample_rng = root.substream("presentation");
    Presentation presentation;
    presentation.optimizer = optimizer;
    presentation.adadelta = &run.adadelta;
    presentation.adadelta_learning_rate = config.adadelta_learning_rate;
    presentation.prediction_dropout = config.noise.prediction_dropout;
    presentation.rng = &sample_rng;

    for (std::size_t n = 0; n < limit; ++n) {
      const std::size_t idx = order[n];
      const Vector x = add_gaussian_noise(train.image(idx), config.noise.input_noise_var,
                                          sample_rng);
      std::optional<Vector> target;
      if (supervised) {
        target = add_gaussian_noise(one_hot(static_cast<std::size_t>(train.label(idx))),
                                    config.noise.target_noise_var, sample_rng);
      }
      const auto report = run_inference(run.net, x, target, config.schedule, presentation);
      f_sum += report.settled_free_energy;
      if (++seen % kCheckpointEvery == 0) {
        push_trace(trace, seen, 0, "free_energy", f_sum / kCheckpointEvery);
        f_sum = 0.0;
        for (std::size_t l = 0; l < run.net.top(); ++l) {
          push_trace(trace, seen, l, "sigma", run.net.layer(l).sigma.mean());
        }
      }
    }
    if (after_epoch) after_epoch(epoch);
  }
}

Schedule evaluation_schedule(const ExperimentConfig& config) {
  Schedule s = config.schedule;
  s.t_activity = config.t_activity_test;
  return s;
}

MnistRun make_mnist_run(const ExperimentConfig& config) {
  Rng init = Rng(config.seed).substream("mnist-init");
  MnistRun run{build_network(config, init), {}};
  run.adadelta = AdadeltaState::for_network(run.net, config.adadelta_rho, config.adadelta_eps);
  return run;
}

double classification_accuracy(PcNetwork& net, const Dataset& test, std::size_t limit,
                               const Schedule& schedule) {
  Presentation presentation;
  presentation.learn = false;
  // The mean of a one-hot label: no class is favoured at the start.
  const std::size_t classes = net.layer(net.top()).width();
  presentation.top_init = Vector::Constant(static_cast<Eigen::Index>(classes), 1.0 / classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < limit; ++i) {
    run_inference(net, test.image(i), std::nullopt, schedule, presentation);
    Eigen::Index guess = 0;
    net.layer(net.top()).mu.maxCoeff(&guess);
    if (guess == test.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(limit);
}

std::string four_digits(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

ExperimentResult exp_mnist_classification(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const fs::path dir = resolve_mnist_dir(config);
  const Dataset train = load_mnist_split(dir, true);
  const Dataset test = load_mnist_split(dir, false);
  const std::size_t test_limit = std::min(config.test_limit, test.count());
  const Schedule eval = evaluation_schedule(config);

  MnistRun run = make_mnist_run(config);
  auto& trace = result.trace_sets[""];
  double accuracy = classification_accuracy(run.net, test, test_limit, eval);
  push_trace(trace, 0, run.net.top(), "accuracy", accuracy);
  result.metrics["untrained_accuracy"] = accuracy;
  const std::size_t per_epoch = std::min(config.train_limit, train.count());
  train_mnist(config, run, train, true, trace, [&](std::size_t epoch) {
    accuracy = classification_accuracy(run.net, test, test_limit, eval);
    push_trace(trace, (epoch + 1) * per_epoch, run.net.top(), "accuracy", accuracy);
  });
  result.metrics["accuracy"] = accuracy;
  result.metrics["test_samples"] = static_cast<double>(test_limit);
  for (std::size_t l = 0; l < run.net.top(); ++l) {
    result.metrics["sigma_layer_" + std::to_string(l)] = run.net.layer(l).sigma.mean();
  }
  return result;
}

Vector decode_from(const PcNetwork& network, std::size_t from) {
  if (from >= network.num_layers()) {
    throw ArgumentError("decode_from: layer " + std::to_string(from) + " out of range");
  }
  Vector v = network.layer(from).mu;
  for (std::size_t k = from; k-- > 0;) {
    const LayerState& layer = network.layer(k);
    v = predict(v, layer.theta, layer.activation);
  }
  return v;
}

void write_pgm(const fs::path& path, const Vector& pixels, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(pixels.size()) != rows * cols) {
    throw ShapeError("write_pgm: " + std::to_string(pixels.size()) + " pixels for " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  auto out = open_output(path);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels[i], 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
}

ExperimentResult exp_mnist_reconstruction(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const fs::path dir = resolve_mnist_dir(config);
  const Dataset train = load_mnist_split(dir, true);
  const Dataset test = load_mnist_split(dir, false);
  const std::size_t test_limit = std::min(config.test_limit, test.count());

  MnistRun run = make_mnist_run(config);
  train_mnist(config, run, train, true, result.trace_sets[""], nullptr);
  PcNetwork& net = run.net;
  const std::size_t top = net.top();
  const fs::path out_dir = config.out_dir;

  // Posterior: label and image clamped, t_activity_test hidden updates.
  const Schedule eval = evaluation_schedule(config);
  Presentation quiet;
  quiet.learn = false;
  std::size_t wins = 0;
  std::vector<double> prior_mse, posterior_mse;
  std::ostringstream table;
  table << "sample_index,label,prior_mse,posterior_mse\n";
  for (std::size_t i = 0; i < test_limit; ++i) {
    const Vector image = test.image(i);
    const Vector label = one_hot(static_cast<std::size_t>(test.label(i)));
    // Prior: label clamped, zero activity updates.
    net.layer(top).mu = label;
    const Vector prior = decode_from(net, top);
    run_inference(net, image, label, eval, quiet);
    const Vector posterior = decode_from(net, 1);
    prior_mse.push_back(mse(prior, image));
    posterior_mse.push_back(mse(posterior, image));
    if (posterior_mse.back() < prior_mse.back()) ++wins;
    table << i << ',' << test.label(i) << ',' << format_real(prior_mse.back()) << ','
          << format_real(posterior_mse.back()) << '\n';
    if (i < config.image_dump_count) {
      const std::string id = four_digits(i);
      write_pgm(out_dir / ("input_" + id + ".pgm"), image, 28, 28);
      write_pgm(out_dir / ("prior_" + id + ".pgm"), prior, 28, 28);
      write_pgm(out_dir / ("posterior_" + id + ".pgm"), posterior, 28, 28);
      for (const char* kind : {"input_", "prior_", "posterior_"}) {
        result.artifacts.push_back(std::string(kind) + id + ".pgm");
      }
    }
  }
  write_text(out_dir / "reconstruction.csv", table.str());
  result.artifacts.push_back("reconstruction.csv");

  // Input-layer variance map, scaled so the largest variance is white.
  const Vector& sigma0 = net.layer(0).sigma;
  {
    std::ostringstream sigma_csv;
    sigma_csv << "unit,sigma\n";
    for (Eigen::Index u = 0; u < sigma0.size(); ++u) {
      sigma_csv << u << ',' << format_real(sigma0[u]) << '\n';
    }
    write_text(out_dir / "sigma_input.csv", sigma_csv.str());
    const double peak = sigma0.maxCoeff();
    write_pgm(out_dir / "sigma_input.pgm", peak > 0.0 ? Vector(sigma0 / peak) : sigma0, 28, 28);
    result.artifacts.push_back("sigma_input.csv");
    result.artifacts.push_back("sigma_input.pgm");
  }

  // Prior images per class against the class-mean templates.
  std::vector<Vector> templates(10, Vector::Zero(784));
  std::vector<double> counts(10, 0.0);
  const std::size_t train_used = std::min(config.train_limit, train.count());
  for (std::size_t i = 0; i < train_used; ++i) {
    templates[static_cast<std::size_t>(train.label(i))] += train.image(i);
    counts[static_cast<std::size_t>(train.label(i))] += 1.0;
  }
  auto correlation = [](const Vector& a, const Vector& b) {
    const Eigen::ArrayXd ca = a.array() - a.mean();
    const Eigen::ArrayXd cb = b.array() - b.mean();
    const double denom = std::sqrt((ca * ca).sum() * (cb * cb).sum());
    return denom > 0.0 ? (ca * cb).sum() / denom : 0.0;
  };
  std::size_t matches = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    if (counts[k] > 0.0) templates[k] /= counts[k];
  }
  for (std::size_t k = 0; k < 10; ++k) {
    net.layer(top).mu = one_hot(k);
    const Vector prior = decode_from(net, top);
    write_pgm(out_dir / ("class_prior_" + std::to_string(k) + ".pgm"), prior, 28, 28);
    result.artifacts.push_back("class_prior_" + std::to_string(k) + ".pgm");
    std::size_t best = 0;
    double best_corr = -2.0;
    for (std::size_t j = 0; j < 10; ++j) {
      const double c = correlation(prior, templates[j]);
      if (c > best_corr) {
        best_corr = c;
        best = j;
      }
    }
    if (best == k) ++matches;
    if (k == 3) result.metrics["class_3_template_match"] = best == 3 ? 1.0 : 0.0;
  }

  result.metrics["posterior_win_fraction"] = static_cast<double>(wins) / test_limit;
  result.metrics["prior_mse"] = mean_of(prior_mse);
  result.metrics["posterior_mse"] = mean_of(posterior_mse);
  result.metrics["sigma_input_mean"] = sigma0.mean();
  result.metrics["template_matches"] = static_cast<double>(matches);
  result.metrics["test_samples"] = static_cast<double>(test_limit);
  return result;
}

double knn_accuracy(const std::vector<Vector>& points, const std::vector<int>& labels,
                    std::size_t k) {
  if (points.size() != labels.size()) throw ShapeError("knn_accuracy: points vs labels");
  if (points.size() <= k) {
    throw ArgumentError("knn_accuracy: need more than k=" + std::to_string(k) + " points");
  }
  const std::size_t n = points.size();
  Matrix stacked(points.front().size(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) stacked.col(static_cast<Eigen::Index>(i)) = points[i];
  const Vector norms = stacked.colwise().squaredNorm().transpose();

  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector dots = stacked.transpose() * points[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double d = norms[static_cast<Eigen::Index>(j)] - 2.0 * dots[static_cast<Eigen::Index>(j)] +
                       norms[static_cast<Eigen::Index>(i)];
      dist[j] = {j == i ? std::numeric_limits<double>::infinity() : d, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::map<int, std::size_t> votes;
    std::size_t best_votes = 0;
    for (std::size_t m = 0; m < k; ++m) {
      best_votes = std::max(best_votes, ++votes[labels[dist[m].second]]);
    }
    int guess = labels[dist[0].second];
    for (std::size_t m = 0; m < k; ++m) {
      if (votes[labels[dist[m].second]] == best_votes) {
        guess = labels[dist[m].second];
        break;
      }
    }
    if (guess == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

ExperimentResult exp_autoencode(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const fs::path dir = resolve_mnist_dir(config);
  const Dataset train = load_mnist_split(dir, true);
  const Dataset test = load_mnist_split(dir, false);
  const std::size_t test_limit = std::min(config.test_limit, test.count());
  const fs::path out_dir = config.out_dir;

  MnistRun run = make_mnist_run(config);
  train_mnist(config, run, train, false, result.trace_sets[""], nullptr);
  PcNetwork& net = run.net;
  const std::size_t top = net.top();

  Vector mean_image = Vector::Zero(784);
  const std::size_t train_used = std::min(config.train_limit, train.count());
  for (std::size_t i = 0; i < train_used; ++i) mean_image += train.image(i);
  mean_image /= static_cast<double>(train_used);

  const Schedule eval = evaluation_schedule(config);
  Presentation quiet;
  quiet.learn = false;
  std::vector<Vector> embeddings;
  std::vector<int> labels;
  std::vector<std::vector<double>> layer_mse(top + 1);
  std::vector<double> baseline_mse;
  std::ostringstream csv;
  csv << "sample_index,label";
  for (std::size_t d = 0; d < net.layer(top).width(); ++d) csv << ",dim_" << d;
  csv << '\n';
  for (std::size_t i = 0; i < test_limit; ++i) {
    const Vector image = test.image(i);
    run_inference(net, image, std::nullopt, eval, quiet);
    embeddings.push_back(net.layer(top).mu);
    labels.push_back(test.label(i));
    csv << i << ',' << test.label(i);
    for (Eigen::Index d = 0; d < embeddings.back().size(); ++d) {
      csv << ',' << format_real(embeddings.back()[d]);
    }
    csv << '\n';
    baseline_mse.push_back(mse(mean_image, image));
    for (std::size_t l = 1; l <= top; ++l) {
      const Vector decoded = decode_from(net, l);
      layer_mse[l].push_back(mse(decoded, image));
      if (i < config.image_dump_count) {
        const std::string name = "decode_l" + std::to_string(l) + "_" + four_digits(i) + ".pgm";
        write_pgm(out_dir / name, decoded, 28, 28);
        result.artifacts.push_back(name);
      }
    }
    if (i < config.image_dump_count) {
      const std::string name = "input_" + four_digits(i) + ".pgm";
      write_pgm(out_dir / name, image, 28, 28);
      result.artifacts.push_back(name);
    }
  }
  write_text(out_dir / "embeddings.csv", csv.str());
  result.artifacts.push_back("embeddings.csv");

  for (std::size_t l = 1; l <= top; ++l) {
    result.metrics["mse_layer_" + std::to_string(l)] = mean_of(layer_mse[l]);
  }
  result.metrics["mse_mean_image"] = mean_of(baseline_mse);
  result.metrics["knn_accuracy"] = knn_accuracy(embeddings, labels, config.knn_k);
  result.metrics["test_samples"] = static_cast<double>(test_limit);
  result.metrics["sigma_input_mean"] = net.layer(0).sigma.mean();
  for (std::size_t l = 1; l <= top; ++l) push_trace(result.trace_sets[""], l, l, "mse",
                                                    mean_of(layer_mse[l]));
  return result;
}

// -------------------------------------------------------------- diagnostics

ExperimentResult exp_fisher_check(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  Rng init = Rng(config.seed).substream("fisher-init");
  PcNetwork net = build_network(config, init);
  for (std::size_t i = 0; i < config.fisher_sigma.size(); ++i) {
    net.layer(0).sigma[static_cast<Eigen::Index>(i)] = config.fisher_sigma[i];
  }
  auto to_rows = [](const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  json doc = json::object();
  for (const char* text : {"activity:0", "weights:0"}) {
    const auto sel = ParameterSelector::parse(text);
    const std::uint64_t seed = Rng(config.seed).substream("fisher", sel.kind ==
        ParameterSelector::Kind::kActivity ? 0 : 1).next_u64();
    const FisherReport report = empirical_fisher(net, sel, config.noise, config.samples, seed);
    const std::string tag = sel.kind == ParameterSelector::Kind::kActivity ? "activity"
                                                                           : "weights";
    result.metrics[tag + ".relative_error"] = report.relative_error;
    doc[text] = {{"analytic", to_rows(report.analytic)},
                 {"empirical", to_rows(report.empirical)},
                 {"relative_error", report.relative_error},
                 {"sample_count", report.sample_count}};
  }
  result.metrics["samples"] = static_cast<double>(config.samples);
  write_text(fs::path(config.out_dir) / "fisher.json", doc.dump(2) + "\n");
  result.artifacts.push_back("fisher.json");
  result.trace_sets[""];
  return result;
}

double gradcheck_network(const PcNetwork& network, double h) {
  PcNetwork work = network;
  compute_errors(work);
  auto energy = [](PcNetwork& net) {
    compute_errors(net);
    return free_energy(net);
  };
  auto rel = [](const auto& a, const auto& n) {
    const double scale = std::max({a.norm(), n.norm(), 1e-12});
    return (a - n).norm() / scale;
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < work.num_layers(); ++l) {
    const Vector analytic = activity_descent(neighbor_view(work, l));
    Vector numeric(analytic.size());
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      PcNetwork probe = work;
      const double x = probe.layer(l).mu[i];
      probe.layer(l).mu[i] = x + h;
      const double up = energy(probe);
      probe.layer(l).mu[i] = x - h;
      const double down = energy(probe);
      numeric[i] = -0.5 * (up - down) / (2.0 * h);
    }
    worst = std::max(worst, rel(analytic, numeric));
  }
  for (std::size_t l = 0; l < work.top(); ++l) {
    const Matrix analytic = weight_gradient(work, l);
    Matrix numeric(analytic.rows(), analytic.cols());
    for (Eigen::Index r = 0; r < analytic.rows(); ++r) {
      for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
        PcNetwork probe = work;
        const double x = probe.layer(l).theta(r, c);
        probe.layer(l).theta(r, c) = x + h;
        const double up = energy(probe);
        probe.layer(l).theta(r, c) = x - h;
        const double down = energy(probe);
        numeric(r, c) = -0.5 * (up - down) / (2.0 * h);
      }
    }
    worst = std::max(worst, rel(analytic, numeric));
  }
  return worst;
}

ExperimentResult exp_gradcheck(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.name = config.experiment;
  const auto configured = parsed_activations(config);
  Rng rng = Rng(config.seed).substream("gradcheck");
  result.trace_sets[""];
  double worst = 0.0;
  // Widths act as upper bounds: each network draws its depth in
  // [2, widths.size()] and each layer's width in [1, widths[l]].
  for (std::size_t i = 0; i < config.networks; ++i) {
    const std::size_t depth = 2 + rng.next_u64() % (config.widths.size() - 1);
    std::vector<std::size_t> widths(depth);
    for (std::size_t l = 0; l < depth; ++l) widths[l] = 1 + rng.next_u64() % config.widths[l];
    std::vector<Activation> acts(depth - 1, Activation::kIdentity);
    if (i % 2 == 1) std::copy_n(configured.begin(), depth - 1, acts.begin());
    PcNetwork net(widths, acts, rng);
    for (std::size_t l = 0; l < depth; ++l) {
      LayerState& layer = net.layer(l);
      for (Eigen::Index u = 0; u < layer.mu.size(); ++u) {
        layer.mu[u] = rng.normal();
        layer.sigma[u] = 0.5 + 1.5 * rng.uniform();
      }
    }
    const double err = gradcheck_network(net, config.fd_step);
    worst = std::max(worst, err);
  }
  result.metrics["max_relative_error"] = worst;
  result.metrics["networks"] = static_cast<double>(config.networks);
  result.metrics["pass"] = worst < 1e-6 ? 1.0 : 0.0;
  return result;
}

// ------------------------------------------------------------------ driver

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json doc;
  doc["name"] = result.name;
  doc["seed"] = config.seed;
  doc["config_hash"] = config_hash(config);
  doc["metrics"] = json::object();
  for (const auto& [k, v] : result.metrics) doc["metrics"][k] = v;
  return doc.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path out_dir = config.out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " +
                          ec.message());
  write_text(out_dir / "config.json", to_json(config).dump(2) + "\n");

  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  const std::string& e = config.experiment;
  if (e == "variance-estimation") {
    result = exp_variance_estimation(config);
  } else if (e == "weights-learning") {
    result = exp_weights_learning(config);
  } else if (e == "mnist-classify") {
    result = exp_mnist_classification(config);
  } else if (e == "mnist-reconstruct") {
    result = exp_mnist_reconstruction(config);
  } else if (e == "autoencode") {
    result = exp_autoencode(config);
  } else if (e == "fisher-check") {
    result = exp_fisher_check(config);
  } else {
    result = exp_gradcheck(config);
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string ext = config.format == "json" ? ".json" : ".csv";
  if (result.trace_sets.empty()) result.trace_sets[""];
  for (const auto& [tag, records] : result.trace_sets) {
    const fs::path path = out_dir / ((tag.empty() ? "traces" : "traces_" + tag) + ext);
    auto out = open_output(path);
    if (config.format == "json") {
      write_trace_json(out, records);
    } else {
      write_trace_csv(out, records);
    }
  }
  write_text(out_dir / "summary.json", summary_json(config, result));
  write_text(out_dir / "timing.json",
             json({{"wall_seconds", result.wall_seconds}}).dump() + "\n");
  return result;
}

}  // namespace pcn
