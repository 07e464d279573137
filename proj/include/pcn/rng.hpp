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

#ifndef PCN_RNG_HPP
#define PCN_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace pcn {

/// 64-bit FNV-1a, used to turn substream names and configs into seeds/hashes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Seeded random stream. Every stream in a run derives from one root seed
/// through `substream`, so two runs with equal seeds draw identical numbers
/// regardless of how many other streams were created in between.
///
/// Gaussian draws use the Box-Muller transform on top of the engine's raw
/// 64-bit output, which keeps sequences identical across standard libraries
/// (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream identified by `name` and `index`.
  Rng substream(std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  double normal(double mean, double variance);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pcn

#endif  // PCN_RNG_HPP
