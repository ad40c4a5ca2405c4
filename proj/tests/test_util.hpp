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

#ifndef DTSNN_TESTS_TEST_UTIL_HPP_
#define DTSNN_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "dtsnn/random.hpp"
#include "dtsnn/tensor.hpp"

namespace dtsnn::testing {

// |a - b| <= rel * max(|a|, |b|), with an absolute floor for values that
// should both be zero.
inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

// Central difference of f with respect to x[i].
inline double central_diff(BasicTensor<double>& x, std::size_t i,
                           const std::function<double()>& f, double h = 1e-6) {
  const double saved = x[i];
  x[i] = saved + h;
  const double up = f();
  x[i] = saved - h;
  const double down = f();
  x[i] = saved;
  return (up - down) / (2 * h);
}

inline void fill_uniform(BasicTensor<double>& t, Rng& rng, double lo, double hi) {
  for (auto& v : t.data) v = uniform(rng, lo, hi);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dtsnn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dtsnn::testing

#endif  // DTSNN_TESTS_TEST_UTIL_HPP_
