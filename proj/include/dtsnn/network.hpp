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

#ifndef DTSNN_NETWORK_HPP_
#define DTSNN_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "dtsnn/nn_core.hpp"
#include "dtsnn/spiking.hpp"

namespace dtsnn {

enum class NeuronModel : std::uint8_t { dc = 0, ct = 1 };
enum class LossTarget : std::uint8_t { output_potentials = 0, spike_counts = 1 };

const char* to_string(NeuronModel m);
const char* to_string(LossTarget t);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;  // output units (dense) or kernels (conv)
};

// A named architecture plus its reference training hyperparameters.
struct ModelPreset {
  std::string id;
  NeuronModel model = NeuronModel::dc;
  Shape input_shape;
  std::vector<LayerSpec> layers;
  std::size_t epochs = 0;
  double lr_start = 1e-3;
  double lr_end = 1e-7;
  double dropout_input = 0.0;
  double dropout_hidden = 0.0;
  std::size_t t_train = 1;
  LossTarget loss_target = LossTarget::output_potentials;
};

const ModelPreset& find_preset(std::string_view id);
std::vector<std::string> preset_ids();

// Layer stack. Every dense/conv layer is followed by the binary activation
// except, in the DC model, the last one, whose potentials are the readout.
// A maxpool layer pools the spikes of the conv layer before it.
template <class Real>
struct BasicNetwork {
  std::string preset_id;
  NeuronModel model = NeuronModel::dc;
  Shape input_shape;
  std::vector<BasicLayerParams<Real>> layers;

  std::size_t input_size() const { return shape_size(input_shape); }
  std::size_t output_size() const { return layers.back().bias.size(); }
  // Shape entering each layer, plus the final output shape.
  std::vector<Shape> activation_shapes() const;

  template <class Other>
  BasicNetwork<Other> cast() const {
    BasicNetwork<Other> out{preset_id, model, input_shape, {}};
    for (const auto& l : layers) out.layers.push_back(l.template cast<Other>());
    return out;
  }
};

using Network = BasicNetwork<float>;

// Glorot-initialized network for a preset. Throws DimensionError if the
// preset's layers do not chain.
template <class Real>
BasicNetwork<Real> build_network(const ModelPreset& preset, Rng& rng);

// Dense-only stack with the given widths (sizes[0] is the input).
template <class Real>
BasicNetwork<Real> build_mlp(std::string id, NeuronModel model,
                             const std::vector<std::size_t>& sizes, Rng& rng);

// Checks that parameter shapes match what `preset` prescribes.
template <class Real>
void validate_against_preset(const BasicNetwork<Real>& net, const ModelPreset& preset);

template <class Real>
struct LayerCache {
  BasicTensor<Real> input;  // after dropout
  BasicTensor<Real> v;      // membrane potential (v_pre for CT)
  std::vector<std::uint32_t> argmax;
};

// Per-layer input dropout masks; empty entries mean identity.
template <class Real>
using DropoutMasks = std::vector<BasicDropoutMask<Real>>;

template <class Real>
struct DcPass {
  std::vector<LayerCache<Real>> layers;
  BasicTensor<Real> output_potential;
  BasicTensor<Real> output_spikes;  // y_b of the readout, for spike voting
};

template <class Real>
DcPass<Real> forward_dc(const BasicNetwork<Real>& net, const BasicTensor<Real>& input,
                        double theta, Activation act = Activation::binary,
                        const DropoutMasks<Real>& masks = {});

// Accumulates parameter gradients given d loss / d output_potential.
template <class Real>
void backward_dc(const BasicNetwork<Real>& net, const DcPass<Real>& pass,
                 const BasicTensor<Real>& grad_output,
                 std::vector<BasicGradients<Real>>& grads,
                 const DropoutMasks<Real>& masks = {});

template <class Real>
struct CtPass {
  std::vector<std::vector<LayerCache<Real>>> steps;  // [t][layer]
  std::vector<BasicTensor<Real>> output_spikes;      // [t]
  BasicTensor<Real> counts;                          // sum over steps
};

// Unrolls the CT model over the inputs with zero initial membranes.
template <class Real>
CtPass<Real> forward_ct(const BasicNetwork<Real>& net,
                        std::span<const BasicTensor<Real>> inputs, double theta,
                        Activation act = Activation::binary,
                        const DropoutMasks<Real>& masks = {});

// BPTT given d loss / d counts (the same gradient reaches every step's
// output spikes).
template <class Real>
void backward_ct(const BasicNetwork<Real>& net, const CtPass<Real>& pass,
                 const BasicTensor<Real>& grad_counts, const SteConfig& cfg,
                 std::vector<BasicGradients<Real>>& grads,
                 const DropoutMasks<Real>& masks = {});

template <class Real>
std::vector<BasicGradients<Real>> zero_gradients(const BasicNetwork<Real>& net);

// Index of the largest value; ties go to the lowest index.
template <class Real>
std::size_t argmax_lowest(std::span<const Real> values);

template <class Real>
  requires(!std::is_const_v<Real>)
std::size_t argmax_lowest(std::span<Real> values) {
  return argmax_lowest(std::span<const Real>(values));
}

}  // namespace dtsnn

#endif  // DTSNN_NETWORK_HPP_
