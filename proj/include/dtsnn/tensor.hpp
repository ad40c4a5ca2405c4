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

#ifndef DTSNN_TENSOR_HPP_
#define DTSNN_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dtsnn/errors.hpp"

namespace dtsnn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape);

// Dense row-major array. The numerics are instantiated for float (training
// and inference) and double (finite-difference oracles).
template <class Real>
struct BasicTensor {
  Shape shape;
  std::vector<Real> data;

  BasicTensor() = default;
  explicit BasicTensor(Shape s, Real fill = Real{0})
      : shape(std::move(s)), data(shape_size(shape), fill) {}
  BasicTensor(Shape s, std::vector<Real> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (shape_size(shape) != data.size()) {
      throw DimensionError("tensor shape " + shape_to_string(shape) +
                           " does not match " + std::to_string(data.size()) +
                           " values");
    }
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool empty() const { return data.empty(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  Real& operator[](std::size_t i) { return data[i]; }
  const Real& operator[](std::size_t i) const { return data[i]; }

  std::span<Real> span() { return data; }
  std::span<const Real> span() const { return data; }

  void fill(Real value) { std::fill(data.begin(), data.end(), value); }

  // Reinterprets the storage under a new shape of equal size.
  BasicTensor reshaped(Shape s) const {
    return BasicTensor(std::move(s), data);
  }

  template <class Other>
  BasicTensor<Other> cast() const {
    BasicTensor<Other> out(shape);
    for (std::size_t i = 0; i < data.size(); ++i) {
      out.data[i] = static_cast<Other>(data[i]);
    }
    return out;
  }

  bool all_finite() const;
};

using Tensor = BasicTensor<float>;

extern template struct BasicTensor<float>;
extern template struct BasicTensor<double>;

}  // namespace dtsnn

#endif  // DTSNN_TENSOR_HPP_
