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

#include "pcn/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pcn/error.hpp"
#include "pcn/rng.hpp"

namespace pcn {

namespace {

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

Dataset::Dataset(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> pixels,
                 std::vector<std::uint8_t> labels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)), labels_(std::move(labels)) {
  if (pixels_.size() != labels_.size() * rows_ * cols_) {
    throw DataError("dataset: " + std::to_string(pixels_.size()) + " pixel bytes for " +
                    std::to_string(labels_.size()) + " images of " + std::to_string(rows_) +
                    "x" + std::to_string(cols_));
  }
}

Vector Dataset::image(std::size_t i) const {
  if (i >= count()) throw ArgumentError("image index " + std::to_string(i) + " out of range");
  const std::size_t n = pixels_per_image();
  Vector v(static_cast<Eigen::Index>(n));
  const std::uint8_t* p = pixels_.data() + i * n;
  for (std::size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = p[k] / 255.0;
  return v;
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, count());
  const std::size_t per = pixels_per_image();
  return Dataset(rows_, cols_,
                 std::vector<std::uint8_t>(pixels_.begin(),
                                           pixels_.begin() + static_cast<std::ptrdiff_t>(n * per)),
                 std::vector<std::uint8_t>(labels_.begin(),
                                           labels_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Dataset parse_mnist_idx(std::span<const std::uint8_t> image_bytes,
                        std::span<const std::uint8_t> label_bytes) {
  if (image_bytes.size() < 16) throw DataError("image file truncated: header needs 16 bytes");
  if (label_bytes.size() < 8) throw DataError("label file truncated: header needs 8 bytes");

  const std::uint32_t image_magic = read_be32(image_bytes, 0);
  if (image_magic != kIdxImageMagic) {
    throw DataError("image file: bad magic " + hex32(image_magic) + ", expected " +
                    hex32(kIdxImageMagic));
  }
  const std::uint32_t label_magic = read_be32(label_bytes, 0);
  if (label_magic != kIdxLabelMagic) {
    throw DataError("label file: bad magic " + hex32(label_magic) + ", expected " +
                    hex32(kIdxLabelMagic));
  }

  const std::size_t n = read_be32(image_bytes, 4);
  const std::size_t rows = read_be32(image_bytes, 8);
  const std::size_t cols = read_be32(image_bytes, 12);
  const std::size_t n_labels = read_be32(label_bytes, 4);
  if (n != n_labels) {
    throw DataError("image/label count mismatch: " + std::to_string(n) + " images, " +
                    std::to_string(n_labels) + " labels");
  }
  const std::size_t pixel_bytes = n * rows * cols;
  if (image_bytes.size() < 16 + pixel_bytes) {
    throw DataError("image file truncated: expected " + std::to_string(16 + pixel_bytes) +
                    " bytes, got " + std::to_string(image_bytes.size()));
  }
  if (label_bytes.size() < 8 + n) {
    throw DataError("label file truncated: expected " + std::to_string(8 + n) +
                    " bytes, got " + std::to_string(label_bytes.size()));
  }

  std::vector<std::uint8_t> labels(label_bytes.begin() + 8, label_bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 9) {
      throw DataError("label out of range 0-9: value " + std::to_string(labels[i]) +
                      " at index " + std::to_string(i));
    }
  }
  std::vector<std::uint8_t> pixels(image_bytes.begin() + 16,
                                   image_bytes.begin() + 16 + static_cast<std::ptrdiff_t>(pixel_bytes));
  return Dataset(rows, cols, std::move(pixels), std::move(labels));
}

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  for (const auto& p : {images_path, labels_path}) {
    if (!std::filesystem::exists(p)) throw DataError("missing data file: " + p.string());
  }
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_mnist_idx(images, labels);
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& data) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + data.raw_pixels().size());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(data.count()));
  put_be32(out, static_cast<std::uint32_t>(data.rows()));
  put_be32(out, static_cast<std::uint32_t>(data.cols()));
  out.insert(out.end(), data.raw_pixels().begin(), data.raw_pixels().end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& data) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + data.count());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(data.count()));
  out.insert(out.end(), data.raw_labels().begin(), data.raw_labels().end());
  return out;
}

void write_mnist_idx(const Dataset& data, const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path) {
  write_file(images_path, encode_idx_images(data));
  write_file(labels_path, encode_idx_labels(data));
}

void NoiseSpec::validate() const {
  if (!(input_noise_var >= 0.0)) throw ArgumentError("input_noise_var must be >= 0");
  if (!(target_noise_var >= 0.0)) throw ArgumentError("target_noise_var must be >= 0");
  if (!(prediction_dropout >= 0.0 && prediction_dropout < 1.0)) {
    throw ArgumentError("prediction_dropout must lie in [0, 1)");
  }
}

Vector add_gaussian_noise(const Vector& x, double variance, Rng& rng) {
  if (variance < 0.0) throw ArgumentError("add_gaussian_noise: negative variance");
  if (variance == 0.0) return x;
  const double sd = std::sqrt(variance);
  Vector out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sd * rng.normal();
  return out;
}

Vector dropout_mask(std::size_t len, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
  Vector mask = Vector::Ones(static_cast<Eigen::Index>(len));
  if (rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

std::vector<Vector> constant_signal_stream(double mean, double variance, std::size_t n,
                                           Rng& rng) {
  if (n == 0) throw ArgumentError("constant_signal_stream: n must be >= 1");
  std::vector<Vector> stream;
  stream.reserve(n);
  const Vector base = Vector::Constant(1, mean);
  for (std::size_t i = 0; i < n; ++i) stream.push_back(add_gaussian_noise(base, variance, rng));
  return stream;
}

Vector one_hot(std::size_t index, std::size_t classes) {
  if (index >= classes) {
    throw ArgumentError("one_hot: index " + std::to_string(index) + " >= " +
                        std::to_string(classes));
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(classes));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return v;
}

}  // namespace pcn
