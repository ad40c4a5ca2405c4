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

#include "dtsnn/metrics.hpp"

#include <charconv>

#include "dtsnn/datasets.hpp"
#include "dtsnn/errors.hpp"
#include "dtsnn/kvfile.hpp"

namespace dtsnn {

namespace {

void check_field(const std::string& s) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw ValidationError("metrics field contains a tab or newline: '" + s + "'");
  }
}

void put_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return cols;
}

}  // namespace

std::string format_metrics(std::span<const MetricsRecord> records) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : records) {
    check_field(r.run_id);
    check_field(r.phase);
    check_field(r.metric);
    out += r.run_id;
    out += '\t';
    out += r.phase;
    out += '\t';
    out += std::to_string(r.step);
    out += '\t';
    out += r.metric;
    out += '\t';
    put_double(out, r.value);
    out += '\t';
    put_double(out, r.wall_clock_s);
    out += '\n';
  }
  return out;
}

std::vector<MetricsRecord> parse_metrics(std::string_view text) {
  std::vector<MetricsRecord> out;
  bool header = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (header) {
      if (line != kMetricsHeader) throw FormatError("metrics file has an unexpected header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 6) {
      throw FormatError("metrics line " + std::to_string(line_no) + " has " +
                        std::to_string(cols.size()) + " columns");
    }
    MetricsRecord r;
    r.run_id = cols[0];
    r.phase = cols[1];
    r.step = parse_int("step", cols[2]);
    r.metric = cols[3];
    r.value = parse_double("value", cols[4]);
    r.wall_clock_s = parse_double("wall_clock_s", cols[5]);
    out.push_back(std::move(r));
  }
  if (header) throw FormatError("metrics file is empty");
  return out;
}

void emit_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path) {
  const std::string text = format_metrics(records);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<MetricsRecord> load_metrics(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_metrics(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace dtsnn
