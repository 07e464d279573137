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

#ifndef PCN_TRACE_HPP
#define PCN_TRACE_HPP

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pcn {

/// Closed vocabulary of traced quantities.
///   sigma        mean variance of a layer
///   sigma_unit   variance of one unit (layer field holds the layer)
///   theta        scalar weight (single-unit models)
///   free_energy  F after settling
///   accuracy     classification accuracy
///   mse          reconstruction mean squared error
inline constexpr std::array<std::string_view, 6> kTraceQuantities = {
    "sigma", "sigma_unit", "theta", "free_energy", "accuracy", "mse"};

bool is_trace_quantity(std::string_view name);

struct TraceRecord {
  std::size_t step = 0;
  std::size_t layer = 0;
  std::string quantity;
  double value = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Appends a record; throws ArgumentError for a quantity outside the vocabulary.
void push_trace(std::vector<TraceRecord>& out, std::size_t step, std::size_t layer,
                std::string_view quantity, double value);

/// `step,layer,quantity,value` header followed by one row per record.
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& records);
void write_trace_json(std::ostream& os, const std::vector<TraceRecord>& records);

}  // namespace pcn

#endif  // PCN_TRACE_HPP
