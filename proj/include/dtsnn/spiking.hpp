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

#ifndef DTSNN_SPIKING_HPP_
#define DTSNN_SPIKING_HPP_

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "dtsnn/nn_core.hpp"

namespace dtsnn {

// Binary vector of firings at one discrete time step.
struct SpikeFrame {
  std::vector<std::uint8_t> bits;
  std::size_t step = 0;

  SpikeFrame() = default;
  explicit SpikeFrame(std::size_t width, std::size_t step_index = 0)
      : bits(width, 0), step(step_index) {}
  SpikeFrame(std::vector<std::uint8_t> b, std::size_t step_index)
      : bits(std::move(b)), step(step_index) {}

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
  }
  bool operator==(const SpikeFrame& other) const { return bits == other.bits; }

  template <class Real>
  BasicTensor<Real> to_tensor() const {
    BasicTensor<Real> t({bits.size()});
    for (std::size_t i = 0; i < bits.size(); ++i) t[i] = bits[i] ? Real{1} : Real{0};
    return t;
  }
  // Any nonzero value counts as a spike.
  template <class Real>
  static SpikeFrame from_tensor(const BasicTensor<Real>& t, std::size_t step = 0) {
    SpikeFrame f(t.size(), step);
    for (std::size_t i = 0; i < t.size(); ++i) f.bits[i] = t[i] != Real{0};
    return f;
  }
};

// Forward nonlinearity. `surrogate` replaces the step with
// hs(x) = clip(x/2, 0, 1), whose derivative is the straight-through
// estimator almost everywhere; gradient oracles run networks in that mode.
enum class Activation : std::uint8_t { binary, surrogate };

// How BPTT treats the subtractive reset v_post = v_pre - theta * spike.
enum class ResetGrad : std::uint8_t { ste, detached };

struct SteConfig {
  double theta = 1.0;
  ResetGrad reset_grad = ResetGrad::ste;

  // The estimator window [0, 2] is defined for theta == 1 only.
  void validate() const;
};

// 1 iff x > theta (strict).
constexpr int binary_activation(double x, double theta) { return x > theta ? 1 : 0; }

// Straight-through gradient of the binary activation at theta = 1:
// 0.5 on [0, 2] inclusive, 0 elsewhere.
constexpr double ste_gradient(double x) { return (x >= 0.0 && x <= 2.0) ? 0.5 : 0.0; }

constexpr double hs_surrogate(double x) { return std::clamp(x * 0.5, 0.0, 1.0); }

template <class Real>
Real activate(Real v, double theta, Activation act) {
  if (act == Activation::binary) return static_cast<Real>(binary_activation(v, theta));
  return static_cast<Real>(hs_surrogate(static_cast<double>(v)));
}

template <class Real>
BasicTensor<Real> activate(const BasicTensor<Real>& v, double theta, Activation act) {
  BasicTensor<Real> out(v.shape);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = activate(v[i], theta, act);
  return out;
}

// ---- SNN-DC: membrane cleared every step ----------------------------------

template <class Real>
struct DcLayerOutput {
  BasicTensor<Real> spikes;
  BasicTensor<Real> v;  // pre-activation, kept for backward and readout
};

// v = W * spikes_in + b from zero, spikes = y_b(v). Works for dense and
// conv5x5 params.
template <class Real>
DcLayerOutput<Real> snn_dc_layer(const BasicTensor<Real>& spikes_in,
                                 const BasicLayerParams<Real>& params,
                                 double theta,
                                 Activation act = Activation::binary);

std::pair<SpikeFrame, Tensor> snn_dc_layer(const SpikeFrame& spikes_in,
                                           const LayerParams& params,
                                           double theta);

// upstream * g_b(v), then the affine backward. Returns the input gradient.
template <class Real>
BasicTensor<Real> snn_dc_backward(const BasicTensor<Real>& upstream,
                                  const BasicTensor<Real>& v,
                                  const BasicTensor<Real>& spikes_in,
                                  const BasicLayerParams<Real>& params,
                                  BasicGradients<Real>& grads,
                                  bool need_input_grad = true);

// ---- SNN-CT: membrane carried across steps, reset by subtraction ----------

template <class Real>
struct BasicNeuronState {
  BasicTensor<Real> v_pre;   // before the firing check
  BasicTensor<Real> v_post;  // after it; carried into the next step
  double theta = 1.0;

  static BasicNeuronState zeros(const Shape& shape, double theta) {
    return {BasicTensor<Real>(shape), BasicTensor<Real>(shape), theta};
  }
};

using NeuronState = BasicNeuronState<float>;

template <class Real>
struct CtStepOutput {
  BasicTensor<Real> spikes;
  BasicNeuronState<Real> state;
};

// v_pre = W * spikes_in + b + v_post(t-1); spikes = y_b(v_pre);
// v_post = v_pre - theta * spikes. No clamp on negative potentials.
template <class Real>
CtStepOutput<Real> snn_ct_step(const BasicTensor<Real>& spikes_in,
                               const BasicLayerParams<Real>& params,
                               const BasicNeuronState<Real>& state,
                               Activation act = Activation::binary);

std::pair<SpikeFrame, NeuronState> snn_ct_step(const SpikeFrame& spikes_in,
                                               const LayerParams& params,
                                               const NeuronState& state);

// d v_post / d v_pre under the configured reset treatment.
inline double reset_path_factor(double v_pre, const SteConfig& cfg) {
  return cfg.reset_grad == ResetGrad::ste ? 1.0 - cfg.theta * ste_gradient(v_pre)
                                          : 1.0;
}

template <class Real>
struct CtBackwardOutput {
  BasicTensor<Real> grad_v_pre;
  BasicTensor<Real> grad_in;
  BasicTensor<Real> grad_v_post_prev;  // carry path, factor 1
};

// One reverse step of BPTT through a CT layer. `grad_spikes` and
// `grad_v_post` are the gradients arriving at this step's outputs; an empty
// `grad_v_post` means no later step consumed the membrane.
template <class Real>
CtBackwardOutput<Real> snn_ct_backward_step(const BasicTensor<Real>& grad_spikes,
                                            const BasicTensor<Real>& grad_v_post,
                                            const BasicTensor<Real>& v_pre,
                                            const BasicTensor<Real>& spikes_in,
                                            const BasicLayerParams<Real>& params,
                                            const SteConfig& cfg,
                                            BasicGradients<Real>& grads,
                                            bool need_input_grad = true);

}  // namespace dtsnn

#endif  // DTSNN_SPIKING_HPP_
