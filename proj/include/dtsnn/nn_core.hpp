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

#ifndef DTSNN_NN_CORE_HPP_
#define DTSNN_NN_CORE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dtsnn/random.hpp"
#include "dtsnn/tensor.hpp"

namespace dtsnn {

enum class LayerKind : std::uint8_t { dense = 0, conv5x5 = 1, maxpool2x2 = 2 };

const char* to_string(LayerKind kind);

inline constexpr std::size_t kConvKernel = 5;

// Weights are (out x in) for dense layers and (K x C x 5 x 5) for
// convolutions. Pooling layers carry no parameters.
template <class Real>
struct BasicLayerParams {
  LayerKind kind = LayerKind::dense;
  BasicTensor<Real> weights;
  BasicTensor<Real> bias;

  static BasicLayerParams dense(std::size_t out, std::size_t in);
  static BasicLayerParams conv(std::size_t kernels, std::size_t channels);
  static BasicLayerParams maxpool();

  bool has_params() const { return kind != LayerKind::maxpool2x2; }
  std::size_t fan_in() const;
  std::size_t fan_out() const;

  template <class Other>
  BasicLayerParams<Other> cast() const {
    return {kind, weights.template cast<Other>(), bias.template cast<Other>()};
  }
};

using LayerParams = BasicLayerParams<float>;

// Gradient accumulators shaped like a layer's weights and bias.
template <class Real>
struct BasicGradients {
  BasicTensor<Real> weights;
  BasicTensor<Real> bias;

  static BasicGradients zeros_like(const BasicLayerParams<Real>& params) {
    return {BasicTensor<Real>(params.weights.shape),
            BasicTensor<Real>(params.bias.shape)};
  }
  void zero() {
    weights.fill(Real{0});
    bias.fill(Real{0});
  }
};

using Gradients = BasicGradients<float>;

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
template <class Real>
void glorot_init(BasicLayerParams<Real>& params, Rng& rng);

// ---- dense ----------------------------------------------------------------

// W * input + b. The input is flattened, so any shape of matching size works.
template <class Real>
BasicTensor<Real> dense_forward(const BasicTensor<Real>& input,
                                const BasicLayerParams<Real>& params);

// Returns W^T * upstream and accumulates dW += upstream * input^T,
// db += upstream. Passing need_input_grad = false skips the W^T product for
// first layers.
template <class Real>
BasicTensor<Real> dense_backward(const BasicTensor<Real>& input,
                                 const BasicLayerParams<Real>& params,
                                 const BasicTensor<Real>& upstream,
                                 BasicGradients<Real>& grads,
                                 bool need_input_grad = true);

// ---- conv5x5 --------------------------------------------------------------

// Valid cross-correlation: C x H x W -> K x (H-4) x (W-4).
template <class Real>
BasicTensor<Real> conv5x5_forward(const BasicTensor<Real>& input,
                                  const BasicLayerParams<Real>& params);

template <class Real>
BasicTensor<Real> conv5x5_backward(const BasicTensor<Real>& input,
                                   const BasicLayerParams<Real>& params,
                                   const BasicTensor<Real>& upstream,
                                   BasicGradients<Real>& grads,
                                   bool need_input_grad = true);

// ---- maxpool2x2 -----------------------------------------------------------

// Non-overlapping 2x2 max. `argmax` receives, per output element, the flat
// input index that won; ties go to the lowest row-major position.
template <class Real>
BasicTensor<Real> maxpool2x2_forward(const BasicTensor<Real>& input,
                                     std::vector<std::uint32_t>* argmax);

template <class Real>
BasicTensor<Real> maxpool2x2_backward(const Shape& input_shape,
                                      const std::vector<std::uint32_t>& argmax,
                                      const BasicTensor<Real>& upstream);

// Dispatches dense / conv by params.kind.
template <class Real>
BasicTensor<Real> affine_forward(const BasicTensor<Real>& input,
                                 const BasicLayerParams<Real>& params);

template <class Real>
BasicTensor<Real> affine_backward(const BasicTensor<Real>& input,
                                  const BasicLayerParams<Real>& params,
                                  const BasicTensor<Real>& upstream,
                                  BasicGradients<Real>& grads,
                                  bool need_input_grad = true);

// ---- loss -----------------------------------------------------------------

template <class Real>
struct LossResult {
  double loss = 0.0;
  BasicTensor<Real> grad;
};

// (1/N) sum_n sum_c max(0, 1 - t*y)^2 over N x C logits with +-1 targets.
template <class Real>
LossResult<Real> squared_hinge_loss(const BasicTensor<Real>& logits,
                                    const BasicTensor<Real>& targets);

// ---- Adam -----------------------------------------------------------------

template <class Real>
struct BasicAdamState {
  BasicTensor<Real> m;
  BasicTensor<Real> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static BasicAdamState for_param(const BasicTensor<Real>& param) {
    return {BasicTensor<Real>(param.shape), BasicTensor<Real>(param.shape)};
  }
};

using AdamState = BasicAdamState<float>;

// One bias-corrected Adam update. `name` identifies the parameter in errors.
template <class Real>
void adam_step(BasicTensor<Real>& param, const BasicTensor<Real>& grad,
               BasicAdamState<Real>& state, double lr,
               const std::string& name = "param");

// ---- dropout --------------------------------------------------------------

// Per-element multiplier: 0 for dropped units, 1/(1-ratio) for survivors.
template <class Real>
struct BasicDropoutMask {
  double keep_prob = 1.0;
  BasicTensor<Real> mask;

  bool is_identity() const { return mask.empty(); }
  BasicTensor<Real> apply(const BasicTensor<Real>& x) const;
};

using DropoutMask = BasicDropoutMask<float>;

template <class Real>
BasicDropoutMask<Real> make_dropout_mask(const Shape& shape, double ratio,
                                         Rng& rng, bool training);

// Inverted dropout: identity in evaluation mode.
template <class Real>
BasicTensor<Real> dropout_apply(const BasicTensor<Real>& input, double ratio,
                                Rng& rng, bool training,
                                BasicDropoutMask<Real>* mask_out = nullptr);

}  // namespace dtsnn

#endif  // DTSNN_NN_CORE_HPP_
