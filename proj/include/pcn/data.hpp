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

#ifndef PCN_DATA_HPP
#define PCN_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pcn/network.hpp"

namespace pcn {

class Rng;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Labelled grey-scale images. Pixels are kept as the raw bytes of the IDX
/// file; `image(i)` scales them into [0, 1].
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> pixels,
          std::vector<std::uint8_t> labels);

  std::size_t count() const { return labels_.size(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t pixels_per_image() const { return rows_ * cols_; }

  Vector image(std::size_t i) const;
  int label(std::size_t i) const { return labels_.at(i); }

  std::span<const std::uint8_t> raw_pixels() const { return pixels_; }
  std::span<const std::uint8_t> raw_labels() const { return labels_; }

  /// First `n` samples (or all of them when n >= count).
  Dataset head(std::size_t n) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> pixels_;
  std::vector<std::uint8_t> labels_;
};

/// Parses big-endian IDX image (magic 0x803, dims N x rows x cols) and label
/// (magic 0x801, N) files. Throws DataError for missing files, wrong magic,
/// truncation, count mismatch and labels outside 0-9.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

/// Same checks on in-memory file contents.
Dataset parse_mnist_idx(std::span<const std::uint8_t> image_bytes,
                        std::span<const std::uint8_t> label_bytes);

std::vector<std::uint8_t> encode_idx_images(const Dataset& data);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& data);

void write_mnist_idx(const Dataset& data, const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path);

/// Additive, zero-mean, per-element independent noise. `variance` == 0
/// returns `x` unchanged without consuming randomness.
struct NoiseSpec {
  double input_noise_var = 0.0;
  double target_noise_var = 0.0;
  double prediction_dropout = 0.0;
  std::uint64_t seed = 0;

  /// Throws ArgumentError on negative variances or dropout outside [0, 1).
  void validate() const;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

Vector add_gaussian_noise(const Vector& x, double variance, Rng& rng);

/// Inverted dropout: each entry is 0 with probability `rate` and 1/(1-rate)
/// otherwise, so the masked vector keeps its expectation.
Vector dropout_mask(std::size_t len, double rate, Rng& rng);

/// `n` scalar observations `mean + noise`, each a length-1 vector.
std::vector<Vector> constant_signal_stream(double mean, double variance, std::size_t n,
                                           Rng& rng);

Vector one_hot(std::size_t index, std::size_t classes = 10);

}  // namespace pcn

#endif  // PCN_DATA_HPP
