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

#ifndef DTSNN_KVFILE_HPP_
#define DTSNN_KVFILE_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dtsnn {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Flat "key = value" text. Blank lines and lines starting with '#' are
// skipped; anything else without '=' is a FormatError naming the line.
std::vector<KeyValue> parse_key_values(std::string_view text);
std::vector<KeyValue> load_key_values(const std::filesystem::path& path);

double parse_double(std::string_view key, std::string_view value);
long long parse_int(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);

}  // namespace dtsnn

#endif  // DTSNN_KVFILE_HPP_
