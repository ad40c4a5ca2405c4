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

#include "dtsnn/network.hpp"

#include <array>

namespace dtsnn {

const char* to_string(NeuronModel m) { return m == NeuronModel::dc ? "dc" : "ct"; }

const char* to_string(LossTarget t) {
  return t == LossTarget::output_potentials ? "output_potentials" : "spike_counts";
}

namespace {

using enum LayerKind;

const std::array<ModelPreset, 6>& presets() {
  static const std::array<ModelPreset, 6> table = {{
      {"mlp-256", NeuronModel::dc, {784}, {{dense, 256}, {dense, 256}, {dense, 10}},
       400, 1e-3, 1e-7, 0.2, 0.1, 1, LossTarget::output_potentials},
      {"mlp-1024", NeuronModel::dc, {784}, {{dense, 1024}, {dense, 1024}, {dense, 10}},
       400, 1e-3, 1e-7, 0.2, 0.3, 1, LossTarget::output_potentials},
      {"conv", NeuronModel::dc, {1, 28, 28},
       {{conv5x5, 12}, {maxpool2x2, 0}, {conv5x5, 64}, {maxpool2x2, 0},
        {dense, 512}, {dense, 10}},
       200, 1e-3, 1e-5, 0.0, 0.0, 1, LossTarget::output_potentials},
      {"nmnist-mlp", NeuronModel::ct, {1156}, {{dense, 256}, {dense, 256}, {dense, 12}},
       200, 1e-3, 1e-5, 0.2, 0.1, 16, LossTarget::spike_counts},
      // Desk-scale presets used by the acceptance suite.
      {"mlp-128", NeuronModel::dc, {784}, {{dense, 128}, {dense, 128}, {dense, 10}},
       20, 5e-3, 3e-4, 0.2, 0.1, 1, LossTarget::output_potentials},
      {"bar-mlp", NeuronModel::ct, {256}, {{dense, 64}, {dense, 64}, {dense, 2}},
       30, 1e-3, 1e-5, 0.0, 0.0, 16, LossTarget::spike_counts},
  }};
  return table;
}

template <class Real>
BasicLayerParams<Real> make_layer(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case dense:
      return BasicLayerParams<Real>::dense(spec.units, shape_size(in));
    case conv5x5:
      if (in.size() != 3) {
        throw DimensionError("conv layer needs a C x H x W input, got " + shape_to_string(in));
      }
      return BasicLayerParams<Real>::conv(spec.units, in[0]);
    case maxpool2x2:
      return BasicLayerParams<Real>::maxpool();
  }
  throw DimensionError("unknown layer kind");
}

Shape output_shape(LayerKind kind, std::size_t units, const Shape& in) {
  switch (kind) {
    case dense:
      return {units};
    case conv5x5:
      if (in.size() != 3 || in[1] < kConvKernel || in[2] < kConvKernel) {
        throw DimensionError("conv5x5 cannot consume " + shape_to_string(in));
      }
      return {units, in[1] - kConvKernel + 1, in[2] - kConvKernel + 1};
    case maxpool2x2:
      if (in.size() != 3 || in[1] % 2 || in[2] % 2) {
        throw DimensionError("maxpool2x2 cannot consume " + shape_to_string(in));
      }
      return {in[0], in[1] / 2, in[2] / 2};
  }
  return {};
}

template <class Real>
std::size_t layer_units(const BasicLayerParams<Real>& l) {
  return l.has_params() ? l.weights.dim(0) : 0;
}

template <class Real>
BasicTensor<Real> apply_mask(const DropoutMasks<Real>& masks, std::size_t l,
                             BasicTensor<Real> x) {
  if (l < masks.size() && !masks[l].is_identity()) return masks[l].apply(x);
  return x;
}

// The last parameterised layer is the readout.
template <class Real>
std::size_t readout_index(const BasicNetwork<Real>& net) {
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    if (net.layers[l].has_params()) return l;
  }
  throw DimensionError("network has no parameterised layer");
}

}  // namespace

const ModelPreset& find_preset(std::string_view id) {
  for (const auto& p : presets()) {
    if (p.id == id) return p;
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.id;
  throw ValidationError("unknown preset '" + std::string(id) + "' (known: " + known + ")");
}

std::vector<std::string> preset_ids() {
  std::vector<std::string> ids;
  for (const auto& p : presets()) ids.push_back(p.id);
  return ids;
}

template <class Real>
std::vector<Shape> BasicNetwork<Real>::activation_shapes() const {
  std::vector<Shape> shapes{input_shape};
  for (const auto& l : layers) {
    shapes.push_back(output_shape(l.kind, layer_units(l), shapes.back()));
  }
  return shapes;
}

template <class Real>
BasicNetwork<Real> build_network(const ModelPreset& preset, Rng& rng) {
  BasicNetwork<Real> net{preset.id, preset.model, preset.input_shape, {}};
  Shape shape = preset.input_shape;
  for (const auto& spec : preset.layers) {
    auto layer = make_layer<Real>(spec, shape);
    glorot_init(layer, rng);
    shape = output_shape(spec.kind, spec.units, shape);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

template <class Real>
BasicNetwork<Real> build_mlp(std::string id, NeuronModel model,
                             const std::vector<std::size_t>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw DimensionError("an MLP needs at least input and output sizes");
  BasicNetwork<Real> net{std::move(id), model, {sizes[0]}, {}};
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    auto layer = BasicLayerParams<Real>::dense(sizes[i], sizes[i - 1]);
    glorot_init(layer, rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

template <class Real>
void validate_against_preset(const BasicNetwork<Real>& net, const ModelPreset& preset) {
  if (net.preset_id != preset.id) {
    throw ValidationError("model is preset '" + net.preset_id + "', expected '" +
                          preset.id + "'");
  }
  if (net.model != preset.model || net.input_shape != preset.input_shape ||
      net.layers.size() != preset.layers.size()) {
    throw ValidationError("model layout does not match preset '" + preset.id + "'");
  }
  Shape shape = preset.input_shape;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto expected = make_layer<Real>(preset.layers[l], shape);
    const auto& have = net.layers[l];
    if (have.kind != expected.kind || have.weights.shape != expected.weights.shape ||
        have.bias.shape != expected.bias.shape) {
      throw ValidationError("layer " + std::to_string(l) + " has weights " +
                            shape_to_string(have.weights.shape) + ", preset '" +
                            preset.id + "' expects " +
                            shape_to_string(expected.weights.shape));
    }
    shape = output_shape(preset.layers[l].kind, preset.layers[l].units, shape);
  }
}

template <class Real>
std::vector<BasicGradients<Real>> zero_gradients(const BasicNetwork<Real>& net) {
  std::vector<BasicGradients<Real>> grads;
  for (const auto& l : net.layers) grads.push_back(BasicGradients<Real>::zeros_like(l));
  return grads;
}

template <class Real>
std::size_t argmax_lowest(std::span<const Real> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

template <class Real>
DcPass<Real> forward_dc(const BasicNetwork<Real>& net, const BasicTensor<Real>& input,
                        double theta, Activation act, const DropoutMasks<Real>& masks) {
  if (input.size() != net.input_size()) {
    throw DimensionError("network input " + shape_to_string(net.input_shape) +
                         " vs sample " + shape_to_string(input.shape));
  }
  const std::size_t last = readout_index(net);
  DcPass<Real> pass;
  pass.layers.resize(net.layers.size());
  BasicTensor<Real> x = input.reshaped(net.input_shape);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& cache = pass.layers[l];
    const auto& layer = net.layers[l];
    cache.input = apply_mask(masks, l, std::move(x));
    if (layer.kind == LayerKind::maxpool2x2) {
      x = maxpool2x2_forward(cache.input, &cache.argmax);
      continue;
    }
    cache.v = affine_forward(cache.input, layer);
    if (l == last) {
      pass.output_potential = cache.v;
      pass.output_spikes = activate(cache.v, theta, Activation::binary);
      break;
    }
    x = activate(cache.v, theta, act);
  }
  return pass;
}

template <class Real>
void backward_dc(const BasicNetwork<Real>& net, const DcPass<Real>& pass,
                 const BasicTensor<Real>& grad_output,
                 std::vector<BasicGradients<Real>>& grads,
                 const DropoutMasks<Real>& masks) {
  const std::size_t last = readout_index(net);
  BasicTensor<Real> g = grad_output;
  for (std::size_t l = last + 1; l-- > 0;) {
    const auto& cache = pass.layers[l];
    const auto& layer = net.layers[l];
    if (layer.kind == LayerKind::maxpool2x2) {
      g = maxpool2x2_backward(cache.input.shape, cache.argmax, g);
    } else if (l == last) {
      g = affine_backward(cache.input, layer, g, grads[l], l > 0);
    } else {
      g = snn_dc_backward(g, cache.v, cache.input, layer, grads[l], l > 0);
    }
    if (l > 0) g = apply_mask(masks, l, std::move(g));
  }
}

template <class Real>
CtPass<Real> forward_ct(const BasicNetwork<Real>& net,
                        std::span<const BasicTensor<Real>> inputs, double theta,
                        Activation act, const DropoutMasks<Real>& masks) {
  const auto shapes = net.activation_shapes();
  std::vector<BasicNeuronState<Real>> states;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    states.push_back(BasicNeuronState<Real>::zeros(shapes[l + 1], theta));
  }
  CtPass<Real> pass;
  pass.counts = BasicTensor<Real>(shapes.back());
  for (const auto& input : inputs) {
    if (input.size() != net.input_size()) {
      throw DimensionError("network input " + shape_to_string(net.input_shape) +
                           " vs frame " + shape_to_string(input.shape));
    }
    auto& caches = pass.steps.emplace_back(net.layers.size());
    BasicTensor<Real> x = input.reshaped(net.input_shape);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto& cache = caches[l];
      const auto& layer = net.layers[l];
      cache.input = apply_mask(masks, l, std::move(x));
      if (layer.kind == LayerKind::maxpool2x2) {
        x = maxpool2x2_forward(cache.input, &cache.argmax);
        continue;
      }
      auto step = snn_ct_step(cache.input, layer, states[l], act);
      cache.v = step.state.v_pre;
      states[l] = std::move(step.state);
      x = std::move(step.spikes);
    }
    for (std::size_t i = 0; i < x.size(); ++i) pass.counts[i] += x[i];
    pass.output_spikes.push_back(std::move(x));
  }
  return pass;
}

template <class Real>
void backward_ct(const BasicNetwork<Real>& net, const CtPass<Real>& pass,
                 const BasicTensor<Real>& grad_counts, const SteConfig& cfg,
                 std::vector<BasicGradients<Real>>& grads,
                 const DropoutMasks<Real>& masks) {
  std::vector<BasicTensor<Real>> grad_v_post(net.layers.size());
  for (std::size_t t = pass.steps.size(); t-- > 0;) {
    BasicTensor<Real> g = grad_counts;
    for (std::size_t l = net.layers.size(); l-- > 0;) {
      const auto& cache = pass.steps[t][l];
      const auto& layer = net.layers[l];
      if (layer.kind == LayerKind::maxpool2x2) {
        g = maxpool2x2_backward(cache.input.shape, cache.argmax, g);
      } else {
        auto r = snn_ct_backward_step(g, grad_v_post[l], cache.v, cache.input, layer,
                                      cfg, grads[l], l > 0);
        grad_v_post[l] = std::move(r.grad_v_post_prev);
        g = std::move(r.grad_in);
      }
      if (l > 0) g = apply_mask(masks, l, std::move(g));
    }
  }
}

#define DTSNN_INSTANTIATE(Real)                                                          \
  template struct BasicNetwork<Real>;                                                    \
  template BasicNetwork<Real> build_network(const ModelPreset&, Rng&);                   \
  template BasicNetwork<Real> build_mlp(std::string, NeuronModel,                        \
                                        const std::vector<std::size_t>&, Rng&);          \
  template void validate_against_preset(const BasicNetwork<Real>&, const ModelPreset&);  \
  template std::vector<BasicGradients<Real>> zero_gradients(const BasicNetwork<Real>&);  \
  template std::size_t argmax_lowest(std::span<const Real>);                             \
  template DcPass<Real> forward_dc(const BasicNetwork<Real>&, const BasicTensor<Real>&,  \
                                   double, Activation, const DropoutMasks<Real>&);       \
  template void backward_dc(const BasicNetwork<Real>&, const DcPass<Real>&,              \
                            const BasicTensor<Real>&, std::vector<BasicGradients<Real>>&, \
                            const DropoutMasks<Real>&);                                  \
  template CtPass<Real> forward_ct(const BasicNetwork<Real>&,                            \
                                   std::span<const BasicTensor<Real>>, double,           \
                                   Activation, const DropoutMasks<Real>&);               \
  template void backward_ct(const BasicNetwork<Real>&, const CtPass<Real>&,              \
                            const BasicTensor<Real>&, const SteConfig&,                  \
                            std::vector<BasicGradients<Real>>&, const DropoutMasks<Real>&);

DTSNN_INSTANTIATE(float)
DTSNN_INSTANTIATE(double)

#undef DTSNN_INSTANTIATE

}  // namespace dtsnn
