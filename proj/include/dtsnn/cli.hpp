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

#ifndef DTSNN_CLI_HPP_
#define DTSNN_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace dtsnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime error, including missing data
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). Never throws.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtsnn::cli

#endif  // DTSNN_CLI_HPP_
