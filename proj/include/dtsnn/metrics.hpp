// Copyright 2026 The dtsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTSNN_METRICS_HPP_
#define DTSNN_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtsnn {

struct MetricsRecord {
  std::string run_id;
  std::string phase;   // train, eval, quantize, simulate
  std::int64_t step = 0;  // epoch, time step, bit width or sample index
  std::string metric;
  double value = 0.0;
  double wall_clock_s = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

inline constexpr std::string_view kMetricsHeader = "run_id\tphase\tstep\tmetric\tvalue\twall_clock_s";

// Tab-separated, header first, values with round-trip precision.
std::string format_metrics(std::span<const MetricsRecord> records);
std::vector<MetricsRecord> parse_metrics(std::string_view text);

// Throws IoError when the path cannot be written.
void emit_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path);
std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path);

}  // namespace dtsnn

#endif  // DTSNN_METRICS_HPP_
