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

#include "dtsnn/nn_core.hpp"

#include <cmath>

namespace dtsnn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense:
      return "dense";
    case LayerKind::conv5x5:
      return "conv5x5";
    case LayerKind::maxpool2x2:
      return "maxpool2x2";
  }
  return "unknown";
}

template <class Real>
BasicLayerParams<Real> BasicLayerParams<Real>::dense(std::size_t out,
                                                     std::size_t in) {
  return {LayerKind::dense, BasicTensor<Real>({out, in}),
          BasicTensor<Real>({out})};
}

template <class Real>
BasicLayerParams<Real> BasicLayerParams<Real>::conv(std::size_t kernels,
                                                    std::size_t channels) {
  return {LayerKind::conv5x5,
          BasicTensor<Real>({kernels, channels, kConvKernel, kConvKernel}),
          BasicTensor<Real>({kernels})};
}

template <class Real>
BasicLayerParams<Real> BasicLayerParams<Real>::maxpool() {
  return {LayerKind::maxpool2x2, {}, {}};
}

template <class Real>
std::size_t BasicLayerParams<Real>::fan_in() const {
  switch (kind) {
    case LayerKind::dense:
      return weights.dim(1);
    case LayerKind::conv5x5:
      return weights.dim(1) * kConvKernel * kConvKernel;
    case LayerKind::maxpool2x2:
      return 0;
  }
  return 0;
}

template <class Real>
std::size_t BasicLayerParams<Real>::fan_out() const {
  switch (kind) {
    case LayerKind::dense:
      return weights.dim(0);
    case LayerKind::conv5x5:
      return weights.dim(0) * kConvKernel * kConvKernel;
    case LayerKind::maxpool2x2:
      return 0;
  }
  return 0;
}

template <class Real>
void glorot_init(BasicLayerParams<Real>& params, Rng& rng) {
  if (!params.has_params()) return;
  const double limit =
      std::sqrt(6.0 / static_cast<double>(params.fan_in() + params.fan_out()));
  for (auto& w : params.weights.data) {
    w = static_cast<Real>(uniform(rng, -limit, limit));
  }
  params.bias.fill(Real{0});
}

namespace {

void require_kind(LayerKind have, LayerKind want) {
  if (have != want) {
    throw DimensionError(std::string("expected a ") + to_string(want) +
                         " layer, got " + to_string(have));
  }
}

template <class Real>
void require_same_shape(const BasicTensor<Real>& a, const BasicTensor<Real>& b,
                        const char* what) {
  if (a.shape != b.shape) {
    throw DimensionError(std::string(what) + ": shape " +
                         shape_to_string(a.shape) + " vs " +
                         shape_to_string(b.shape));
  }
}

struct ConvGeometry {
  std::size_t channels, height, width, kernels, out_h, out_w;
};

template <class Real>
ConvGeometry conv_geometry(const BasicTensor<Real>& input,
                           const BasicLayerParams<Real>& params) {
  require_kind(params.kind, LayerKind::conv5x5);
  if (input.rank() != 3) {
    throw DimensionError("conv5x5 expects a C x H x W input, got " +
                         shape_to_string(input.shape));
  }
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2),
                 params.weights.dim(0), 0, 0};
  if (params.weights.dim(1) != g.channels) {
    throw DimensionError("conv5x5 input " + shape_to_string(input.shape) +
                         " does not match kernels " +
                         shape_to_string(params.weights.shape));
  }
  if (g.height < kConvKernel || g.width < kConvKernel) {
    throw DimensionError("conv5x5 input " + shape_to_string(input.shape) +
                         " is smaller than the 5x5 kernel");
  }
  g.out_h = g.height - kConvKernel + 1;
  g.out_w = g.width - kConvKernel + 1;
  return g;
}

}  // namespace

template <class Real>
BasicTensor<Real> dense_forward(const BasicTensor<Real>& input,
                                const BasicLayerParams<Real>& params) {
  require_kind(params.kind, LayerKind::dense);
  const std::size_t out = params.weights.dim(0);
  const std::size_t in = params.weights.dim(1);
  if (input.size() != in) {
    throw DimensionError("dense layer input " + shape_to_string(input.shape) +
                         " does not match weights " +
                         shape_to_string(params.weights.shape));
  }
  BasicTensor<Real> result({out});
  const Real* x = input.data.data();
  std::vector<std::uint32_t> active;
  active.reserve(in);
  for (std::size_t i = 0; i < in; ++i) {
    if (x[i] != Real{0}) active.push_back(static_cast<std::uint32_t>(i));
  }
  // Skipping zero terms leaves each sum bitwise unchanged, so the gather
  // path is only a speedup for sparse spike inputs.
  const bool sparse = active.size() * 4 < in;
  for (std::size_t k = 0; k < out; ++k) {
    const Real* row = params.weights.data.data() + k * in;
    Real acc = 0;
    if (sparse) {
      for (auto i : active) acc += row[i] * x[i];
    } else {
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    }
    result[k] = acc + params.bias[k];
  }
  return result;
}

template <class Real>
BasicTensor<Real> dense_backward(const BasicTensor<Real>& input,
                                 const BasicLayerParams<Real>& params,
                                 const BasicTensor<Real>& upstream,
                                 BasicGradients<Real>& grads,
                                 bool need_input_grad) {
  require_kind(params.kind, LayerKind::dense);
  const std::size_t out = params.weights.dim(0);
  const std::size_t in = params.weights.dim(1);
  if (input.size() != in || upstream.size() != out) {
    throw DimensionError("dense backward: input " +
                         shape_to_string(input.shape) + ", upstream " +
                         shape_to_string(upstream.shape) + ", weights " +
                         shape_to_string(params.weights.shape));
  }
  require_same_shape(grads.weights, params.weights, "dense weight gradient");

  // Spike inputs are mostly zero; only touch the active columns.
  std::vector<std::size_t> active;
  active.reserve(in);
  for (std::size_t i = 0; i < in; ++i) {
    if (input[i] != Real{0}) active.push_back(i);
  }
  BasicTensor<Real> grad_in({in});
  for (std::size_t k = 0; k < out; ++k) {
    const Real g = upstream[k];
    if (g == Real{0}) continue;
    grads.bias[k] += g;
    Real* grow = grads.weights.data.data() + k * in;
    for (std::size_t i : active) grow[i] += g * input[i];
    if (need_input_grad) {
      const Real* row = params.weights.data.data() + k * in;
      for (std::size_t i = 0; i < in; ++i) grad_in[i] += g * row[i];
    }
  }
  return grad_in.reshaped(input.shape);
}

template <class Real>
BasicTensor<Real> conv5x5_forward(const BasicTensor<Real>& input,
                                  const BasicLayerParams<Real>& params) {
  const ConvGeometry g = conv_geometry(input, params);
  BasicTensor<Real> out({g.kernels, g.out_h, g.out_w});
  const Real* x = input.data.data();
  for (std::size_t k = 0; k < g.kernels; ++k) {
    Real* plane = out.data.data() + k * g.out_h * g.out_w;
    std::fill(plane, plane + g.out_h * g.out_w, params.bias[k]);
    for (std::size_t c = 0; c < g.channels; ++c) {
      const Real* kern = params.weights.data.data() +
                         (k * g.channels + c) * kConvKernel * kConvKernel;
      const Real* chan = x + c * g.height * g.width;
      for (std::size_t dy = 0; dy < kConvKernel; ++dy) {
        for (std::size_t dx = 0; dx < kConvKernel; ++dx) {
          const Real w = kern[dy * kConvKernel + dx];
          if (w == Real{0}) continue;
          for (std::size_t y = 0; y < g.out_h; ++y) {
            const Real* src = chan + (y + dy) * g.width + dx;
            Real* dst = plane + y * g.out_w;
            for (std::size_t xo = 0; xo < g.out_w; ++xo) dst[xo] += w * src[xo];
          }
        }
      }
    }
  }
  return out;
}

template <class Real>
BasicTensor<Real> conv5x5_backward(const BasicTensor<Real>& input,
                                   const BasicLayerParams<Real>& params,
                                   const BasicTensor<Real>& upstream,
                                   BasicGradients<Real>& grads,
                                   bool need_input_grad) {
  const ConvGeometry g = conv_geometry(input, params);
  if (upstream.shape != Shape{g.kernels, g.out_h, g.out_w}) {
    throw DimensionError("conv5x5 backward: upstream " +
                         shape_to_string(upstream.shape) +
                         " does not match output " +
                         shape_to_string({g.kernels, g.out_h, g.out_w}));
  }
  require_same_shape(grads.weights, params.weights, "conv weight gradient");
  BasicTensor<Real> grad_in(input.shape);
  const Real* x = input.data.data();
  for (std::size_t k = 0; k < g.kernels; ++k) {
    const Real* up = upstream.data.data() + k * g.out_h * g.out_w;
    Real bsum = 0;
    for (std::size_t i = 0; i < g.out_h * g.out_w; ++i) bsum += up[i];
    grads.bias[k] += bsum;
    for (std::size_t c = 0; c < g.channels; ++c) {
      const std::size_t kbase = (k * g.channels + c) * kConvKernel * kConvKernel;
      const Real* chan = x + c * g.height * g.width;
      Real* gchan = grad_in.data.data() + c * g.height * g.width;
      for (std::size_t dy = 0; dy < kConvKernel; ++dy) {
        for (std::size_t dx = 0; dx < kConvKernel; ++dx) {
          const Real w = params.weights[kbase + dy * kConvKernel + dx];
          Real acc = 0;
          for (std::size_t y = 0; y < g.out_h; ++y) {
            const Real* src = chan + (y + dy) * g.width + dx;
            const Real* u = up + y * g.out_w;
            Real* gdst = gchan + (y + dy) * g.width + dx;
            for (std::size_t xo = 0; xo < g.out_w; ++xo) {
              acc += u[xo] * src[xo];
              if (need_input_grad) gdst[xo] += u[xo] * w;
            }
          }
          grads.weights[kbase + dy * kConvKernel + dx] += acc;
        }
      }
    }
  }
  return grad_in;
}

template <class Real>
BasicTensor<Real> maxpool2x2_forward(const BasicTensor<Real>& input,
                                     std::vector<std::uint32_t>* argmax) {
  if (input.rank() != 3) {
    throw DimensionError("maxpool2x2 expects a K x H x W input, got " +
                         shape_to_string(input.shape));
  }
  const std::size_t k = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("maxpool2x2 needs even spatial dims, got " +
                         shape_to_string(input.shape));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  BasicTensor<Real> out({k, oh, ow});
  if (argmax) argmax->assign(out.size(), 0);
  std::size_t o = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        const std::size_t base = (c * h + 2 * y) * w + 2 * x;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        // Strict comparison keeps the lowest row-major index on ties.
        for (int j = 1; j < 4; ++j) {
          if (input[cand[j]] > input[best]) best = cand[j];
        }
        out[o] = input[best];
        if (argmax) (*argmax)[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return out;
}

template <class Real>
BasicTensor<Real> maxpool2x2_backward(const Shape& input_shape,
                                      const std::vector<std::uint32_t>& argmax,
                                      const BasicTensor<Real>& upstream) {
  if (argmax.size() != upstream.size()) {
    throw DimensionError("maxpool2x2 backward: " +
                         std::to_string(argmax.size()) + " routes for upstream " +
                         shape_to_string(upstream.shape));
  }
  BasicTensor<Real> grad(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) grad[argmax[o]] += upstream[o];
  return grad;
}

template <class Real>
BasicTensor<Real> affine_forward(const BasicTensor<Real>& input,
                                 const BasicLayerParams<Real>& params) {
  switch (params.kind) {
    case LayerKind::dense:
      return dense_forward(input, params);
    case LayerKind::conv5x5:
      return conv5x5_forward(input, params);
    case LayerKind::maxpool2x2:
      break;
  }
  throw DimensionError("maxpool2x2 is not an affine layer");
}

template <class Real>
BasicTensor<Real> affine_backward(const BasicTensor<Real>& input,
                                  const BasicLayerParams<Real>& params,
                                  const BasicTensor<Real>& upstream,
                                  BasicGradients<Real>& grads,
                                  bool need_input_grad) {
  switch (params.kind) {
    case LayerKind::dense:
      return dense_backward(input, params, upstream, grads, need_input_grad);
    case LayerKind::conv5x5:
      return conv5x5_backward(input, params, upstream, grads, need_input_grad);
    case LayerKind::maxpool2x2:
      break;
  }
  throw DimensionError("maxpool2x2 is not an affine layer");
}

template <class Real>
LossResult<Real> squared_hinge_loss(const BasicTensor<Real>& logits,
                                    const BasicTensor<Real>& targets) {
  require_same_shape(logits, targets, "squared hinge loss");
  if (logits.rank() != 2) {
    throw DimensionError("squared hinge loss expects N x C logits, got " +
                         shape_to_string(logits.shape));
  }
  const double n = static_cast<double>(logits.dim(0));
  LossResult<Real> result{0.0, BasicTensor<Real>(logits.shape)};
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double t = targets[i];
    if (t != 1.0 && t != -1.0) {
      throw ValidationError("squared hinge target at index " +
                            std::to_string(i) + " is " + std::to_string(t) +
                            ", expected +1 or -1");
    }
    const double margin = std::max(0.0, 1.0 - t * static_cast<double>(logits[i]));
    total += margin * margin;
    result.grad[i] = static_cast<Real>(-2.0 * t * margin / n);
  }
  result.loss = total / n;
  return result;
}

template <class Real>
void adam_step(BasicTensor<Real>& param, const BasicTensor<Real>& grad,
               BasicAdamState<Real>& state, double lr,
               const std::string& name) {
  require_same_shape(param, grad, ("adam step for " + name).c_str());
  require_same_shape(param, state.m, ("adam state for " + name).c_str());
  if (!(lr > 0.0)) {
    throw ValidationError("adam learning rate must be positive, got " +
                          std::to_string(lr));
  }
  if (!grad.all_finite()) {
    throw NumericError("non-finite gradient for parameter " + name);
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    const double v = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    state.m[i] = static_cast<Real>(m);
    state.v[i] = static_cast<Real>(v);
    const double step = lr * (m / c1) / (std::sqrt(v / c2) + state.eps);
    param[i] = static_cast<Real>(param[i] - step);
  }
}

template <class Real>
BasicTensor<Real> BasicDropoutMask<Real>::apply(const BasicTensor<Real>& x) const {
  if (is_identity()) return x;
  require_same_shape(x, mask, "dropout mask");
  BasicTensor<Real> out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

template <class Real>
BasicDropoutMask<Real> make_dropout_mask(const Shape& shape, double ratio,
                                         Rng& rng, bool training) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw ValidationError("dropout ratio must lie in [0, 1), got " +
                          std::to_string(ratio));
  }
  BasicDropoutMask<Real> result;
  result.keep_prob = 1.0 - ratio;
  if (!training || ratio == 0.0) return result;
  result.mask = BasicTensor<Real>(shape);
  const Real scale = static_cast<Real>(1.0 / (1.0 - ratio));
  for (auto& m : result.mask.data) m = bernoulli(rng, ratio) ? Real{0} : scale;
  return result;
}

template <class Real>
BasicTensor<Real> dropout_apply(const BasicTensor<Real>& input, double ratio,
                                Rng& rng, bool training,
                                BasicDropoutMask<Real>* mask_out) {
  auto mask = make_dropout_mask<Real>(input.shape, ratio, rng, training);
  auto out = mask.apply(input);
  if (mask_out) *mask_out = std::move(mask);
  return out;
}

#define DTSNN_INSTANTIATE(Real)                                                \
  template struct BasicLayerParams<Real>;                                      \
  template void glorot_init(BasicLayerParams<Real>&, Rng&);                    \
  template BasicTensor<Real> dense_forward(const BasicTensor<Real>&,           \
                                           const BasicLayerParams<Real>&);     \
  template BasicTensor<Real> dense_backward(                                   \
      const BasicTensor<Real>&, const BasicLayerParams<Real>&,                 \
      const BasicTensor<Real>&, BasicGradients<Real>&, bool);                  \
  template BasicTensor<Real> conv5x5_forward(const BasicTensor<Real>&,         \
                                             const BasicLayerParams<Real>&);   \
  template BasicTensor<Real> conv5x5_backward(                                 \
      const BasicTensor<Real>&, const BasicLayerParams<Real>&,                 \
      const BasicTensor<Real>&, BasicGradients<Real>&, bool);                  \
  template BasicTensor<Real> maxpool2x2_forward(const BasicTensor<Real>&,      \
                                                std::vector<std::uint32_t>*);  \
  template BasicTensor<Real> maxpool2x2_backward(                              \
      const Shape&, const std::vector<std::uint32_t>&,                         \
      const BasicTensor<Real>&);                                               \
  template BasicTensor<Real> affine_forward(const BasicTensor<Real>&,          \
                                            const BasicLayerParams<Real>&);    \
  template BasicTensor<Real> affine_backward(                                  \
      const BasicTensor<Real>&, const BasicLayerParams<Real>&,                 \
      const BasicTensor<Real>&, BasicGradients<Real>&, bool);                  \
  template LossResult<Real> squared_hinge_loss(const BasicTensor<Real>&,       \
                                               const BasicTensor<Real>&);      \
  template void adam_step(BasicTensor<Real>&, const BasicTensor<Real>&,        \
                          BasicAdamState<Real>&, double, const std::string&);  \
  template struct BasicDropoutMask<Real>;                                      \
  template BasicDropoutMask<Real> make_dropout_mask(const Shape&, double,      \
                                                    Rng&, bool);               \
  template BasicTensor<Real> dropout_apply(const BasicTensor<Real>&, double,   \
                                           Rng&, bool,                         \
                                           BasicDropoutMask<Real>*);

DTSNN_INSTANTIATE(float)
DTSNN_INSTANTIATE(double)

#undef DTSNN_INSTANTIATE

}  // namespace dtsnn
