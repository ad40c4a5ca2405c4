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

#include "dtsnn/spiking.hpp"

#include <string>

namespace dtsnn {

void SteConfig::validate() const {
  if (theta != 1.0) {
    throw ValidationError(
        "straight-through training is defined for theta = 1 only, got " +
        std::to_string(theta));
  }
}

template <class Real>
DcLayerOutput<Real> snn_dc_layer(const BasicTensor<Real>& spikes_in,
                                 const BasicLayerParams<Real>& params,
                                 double theta, Activation act) {
  DcLayerOutput<Real> out;
  out.v = affine_forward(spikes_in, params);
  out.spikes = activate(out.v, theta, act);
  return out;
}

std::pair<SpikeFrame, Tensor> snn_dc_layer(const SpikeFrame& spikes_in,
                                           const LayerParams& params,
                                           double theta) {
  auto out = snn_dc_layer(spikes_in.to_tensor<float>(), params, theta);
  return {SpikeFrame::from_tensor(out.spikes, spikes_in.step), std::move(out.v)};
}

template <class Real>
BasicTensor<Real> snn_dc_backward(const BasicTensor<Real>& upstream,
                                  const BasicTensor<Real>& v,
                                  const BasicTensor<Real>& spikes_in,
                                  const BasicLayerParams<Real>& params,
                                  BasicGradients<Real>& grads,
                                  bool need_input_grad) {
  if (upstream.size() != v.size()) {
    throw DimensionError("snn-dc backward: upstream " +
                         shape_to_string(upstream.shape) + " vs potential " +
                         shape_to_string(v.shape));
  }
  BasicTensor<Real> local(v.shape);
  for (std::size_t i = 0; i < v.size(); ++i) {
    local[i] = upstream[i] * static_cast<Real>(ste_gradient(v[i]));
  }
  return affine_backward(spikes_in, params, local, grads, need_input_grad);
}

template <class Real>
CtStepOutput<Real> snn_ct_step(const BasicTensor<Real>& spikes_in,
                               const BasicLayerParams<Real>& params,
                               const BasicNeuronState<Real>& state,
                               Activation act) {
  BasicTensor<Real> injection = affine_forward(spikes_in, params);
  if (injection.shape != state.v_post.shape) {
    throw DimensionError("snn-ct state " + shape_to_string(state.v_post.shape) +
                         " does not match layer output " +
                         shape_to_string(injection.shape));
  }
  CtStepOutput<Real> out;
  out.state.theta = state.theta;
  out.state.v_pre = std::move(injection);
  for (std::size_t i = 0; i < out.state.v_pre.size(); ++i) {
    out.state.v_pre[i] += state.v_post[i];
  }
  out.spikes = activate(out.state.v_pre, state.theta, act);
  out.state.v_post = BasicTensor<Real>(out.state.v_pre.shape);
  const Real theta = static_cast<Real>(state.theta);
  for (std::size_t i = 0; i < out.state.v_pre.size(); ++i) {
    out.state.v_post[i] = out.state.v_pre[i] - theta * out.spikes[i];
  }
  return out;
}

std::pair<SpikeFrame, NeuronState> snn_ct_step(const SpikeFrame& spikes_in,
                                               const LayerParams& params,
                                               const NeuronState& state) {
  auto out = snn_ct_step(spikes_in.to_tensor<float>(), params, state);
  return {SpikeFrame::from_tensor(out.spikes, spikes_in.step), std::move(out.state)};
}

template <class Real>
CtBackwardOutput<Real> snn_ct_backward_step(const BasicTensor<Real>& grad_spikes,
                                            const BasicTensor<Real>& grad_v_post,
                                            const BasicTensor<Real>& v_pre,
                                            const BasicTensor<Real>& spikes_in,
                                            const BasicLayerParams<Real>& params,
                                            const SteConfig& cfg,
                                            BasicGradients<Real>& grads,
                                            bool need_input_grad) {
  if (v_pre.empty()) {
    throw StateError("snn-ct backward called without a cached forward potential");
  }
  const bool have_spike_grad = !grad_spikes.empty();
  const bool have_post_grad = !grad_v_post.empty();
  if ((have_spike_grad && grad_spikes.size() != v_pre.size()) ||
      (have_post_grad && grad_v_post.size() != v_pre.size())) {
    throw DimensionError("snn-ct backward: gradient shapes do not match potential " +
                         shape_to_string(v_pre.shape));
  }
  CtBackwardOutput<Real> out;
  out.grad_v_pre = BasicTensor<Real>(v_pre.shape);
  for (std::size_t i = 0; i < v_pre.size(); ++i) {
    double g = 0.0;
    if (have_spike_grad) g += static_cast<double>(grad_spikes[i]) * ste_gradient(v_pre[i]);
    if (have_post_grad) g += static_cast<double>(grad_v_post[i]) * reset_path_factor(v_pre[i], cfg);
    out.grad_v_pre[i] = static_cast<Real>(g);
  }
  out.grad_v_post_prev = out.grad_v_pre;
  out.grad_in = affine_backward(spikes_in, params, out.grad_v_pre, grads, need_input_grad);
  return out;
}

#define DTSNN_INSTANTIATE(Real)                                                 \
  template DcLayerOutput<Real> snn_dc_layer(const BasicTensor<Real>&,           \
                                            const BasicLayerParams<Real>&,      \
                                            double, Activation);                \
  template BasicTensor<Real> snn_dc_backward(                                   \
      const BasicTensor<Real>&, const BasicTensor<Real>&,                       \
      const BasicTensor<Real>&, const BasicLayerParams<Real>&,                  \
      BasicGradients<Real>&, bool);                                             \
  template CtStepOutput<Real> snn_ct_step(const BasicTensor<Real>&,             \
                                          const BasicLayerParams<Real>&,        \
                                          const BasicNeuronState<Real>&,        \
                                          Activation);                          \
  template CtBackwardOutput<Real> snn_ct_backward_step(                         \
      const BasicTensor<Real>&, const BasicTensor<Real>&,                       \
      const BasicTensor<Real>&, const BasicTensor<Real>&,                       \
      const BasicLayerParams<Real>&, const SteConfig&, BasicGradients<Real>&,   \
      bool);

DTSNN_INSTANTIATE(float)
DTSNN_INSTANTIATE(double)

#undef DTSNN_INSTANTIATE

}  // namespace dtsnn
