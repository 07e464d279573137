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

#include "pcn/trace.hpp"

#include <algorithm>
#include "json.hpp"
#include <ostream>

#include "pcn/error.hpp"
#include "pcn/format.hpp"

namespace pcn {

bool is_trace_quantity(std::string_view name) {
  return std::find(kTraceQuantities.begin(), kTraceQuantities.end(), name) !=
         kTraceQuantities.end();
}

void push_trace(std::vector<TraceRecord>& out, std::size_t step, std::size_t layer,
                std::string_view quantity, double value) {
  if (!is_trace_quantity(quantity)) {
    throw ArgumentError("unknown trace quantity '" + std::string(quantity) + "'");
  }
  out.push_back(TraceRecord{step, layer, std::string(quantity), value});
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& records) {
  os << "step,layer,quantity,value\n";
  for (const auto& r : records) {
    os << r.step << ',' << r.layer << ',' << r.quantity << ',' << format_real(r.value)
       << '\n';
  }
}

void write_trace_json(std::ostream& os, const std::vector<TraceRecord>& records) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"step", r.step},
                    {"layer", r.layer},
                    {"quantity", r.quantity},
                    {"value", r.value}});
  }
  os << rows.dump() << '\n';
}

}  // namespace pcn
