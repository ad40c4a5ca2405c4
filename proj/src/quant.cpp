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

#include "dtsnn/quant.hpp"

#include <cmath>
#include <cstring>

#include "binary_io.hpp"
#include "dtsnn/datasets.hpp"

namespace dtsnn {

QuantizedLayer::QuantizedLayer(std::size_t rows, std::size_t cols,
                               std::vector<std::int32_t> weights_q,
                               std::vector<std::int32_t> bias_q, double scale,
                               std::int32_t theta_q, int bits)
    : rows_(rows),
      cols_(cols),
      weights_q_(std::move(weights_q)),
      bias_q_(std::move(bias_q)),
      scale_(scale),
      theta_q_(theta_q),
      bits_(bits) {
  if (bits_ < 2 || bits_ > 8) {
    throw ValidationError("weight precision must be 2..8 bits, got " + std::to_string(bits_));
  }
  if (weights_q_.size() != rows_ * cols_ || bias_q_.size() != rows_) {
    throw ValidationError("quantized layer payload does not match " + std::to_string(rows_) +
                          " x " + std::to_string(cols_));
  }
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw ValidationError("quantization scale must be positive and finite");
  }
  if (theta_q_ < 1) throw ValidationError("integer threshold must be at least 1");
  for (std::size_t i = 0; i < weights_q_.size(); ++i) {
    if (weights_q_[i] > max_weight() || weights_q_[i] < min_weight()) {
      throw ValidationError("weight " + std::to_string(weights_q_[i]) + " at index " +
                            std::to_string(i) + " is outside the " + std::to_string(bits_) +
                            "-bit range");
    }
  }
  for (auto b : bias_q_) {
    if (b > kAccumulatorMax || b < kAccumulatorMin) {
      throw ValidationError("bias " + std::to_string(b) + " exceeds the accumulator range");
    }
  }
}

QuantizedLayer quantize_layer(const LayerParams& params, int bits, double theta) {
  if (params.kind != LayerKind::dense) {
    throw ValidationError(std::string("only dense layers are quantized, got ") +
                          to_string(params.kind));
  }
  if (bits < 2 || bits > 8) {
    throw ValidationError("weight precision must be 2..8 bits, got " + std::to_string(bits));
  }
  double max_abs = 0.0;
  for (float w : params.weights.data) max_abs = std::max(max_abs, std::fabs(double{w}));
  const double levels = static_cast<double>((1 << (bits - 1)) - 1);
  const double scale = max_abs > 0.0 ? max_abs / levels : 1.0;
  auto to_int = [&](double x) {
    const double q = std::round(x / scale);
    if (!std::isfinite(q) || std::fabs(q) > static_cast<double>(kAccumulatorMax)) {
      throw NumericError("value " + std::to_string(x) + " does not fit the accumulator at scale " +
                         std::to_string(scale));
    }
    return static_cast<std::int32_t>(q);
  };
  std::vector<std::int32_t> wq(params.weights.size()), bq(params.bias.size());
  for (std::size_t i = 0; i < wq.size(); ++i) {
    wq[i] = std::clamp(to_int(params.weights[i]), -static_cast<std::int32_t>(levels) - 1,
                       static_cast<std::int32_t>(levels));
  }
  for (std::size_t i = 0; i < bq.size(); ++i) bq[i] = to_int(params.bias[i]);
  const std::int32_t theta_q = std::max<std::int32_t>(1, to_int(theta));
  return QuantizedLayer(params.weights.dim(0), params.weights.dim(1), std::move(wq),
                        std::move(bq), scale, theta_q, bits);
}

namespace {

void check_width(const SpikeFrame& in, const QuantizedLayer& layer) {
  if (in.size() != layer.cols()) {
    throw DimensionError("quantized layer expects " + std::to_string(layer.cols()) +
                         " inputs, frame has " + std::to_string(in.size()));
  }
}

void accumulate(std::vector<std::int64_t>& v, const SpikeFrame& in, const QuantizedLayer& layer) {
  const std::size_t cols = layer.cols();
  const auto w = layer.weights();
  for (std::size_t i = 0; i < cols; ++i) {
    if (!in.bits[i]) continue;
    for (std::size_t k = 0; k < layer.rows(); ++k) {
      v[k] += w[k * cols + i];
      if (v[k] > kAccumulatorMax || v[k] < kAccumulatorMin) {
        throw NumericError("24-bit accumulator overflow at neuron " + std::to_string(k));
      }
    }
  }
  for (std::size_t k = 0; k < layer.rows(); ++k) {
    v[k] += layer.bias()[k];
    if (v[k] > kAccumulatorMax || v[k] < kAccumulatorMin) {
      throw NumericError("24-bit accumulator overflow at neuron " + std::to_string(k));
    }
  }
}

}  // namespace

QuantDcOutput quantized_forward_dc(const SpikeFrame& spikes_in, const QuantizedLayer& layer) {
  check_width(spikes_in, layer);
  QuantDcOutput out{SpikeFrame(layer.rows(), spikes_in.step),
                    std::vector<std::int64_t>(layer.rows(), 0)};
  accumulate(out.v, spikes_in, layer);
  for (std::size_t k = 0; k < layer.rows(); ++k) out.spikes.bits[k] = out.v[k] > layer.theta_q();
  return out;
}

QuantCtOutput quantized_forward_ct(const SpikeFrame& spikes_in, const QuantizedLayer& layer,
                                   const IntNeuronState& state) {
  check_width(spikes_in, layer);
  if (state.v.size() != layer.rows()) {
    throw DimensionError("integer state has " + std::to_string(state.v.size()) +
                         " neurons, layer has " + std::to_string(layer.rows()));
  }
  QuantCtOutput out{SpikeFrame(layer.rows(), spikes_in.step), state.v, {}};
  accumulate(out.v_pre, spikes_in, layer);
  out.state.v = out.v_pre;
  for (std::size_t k = 0; k < layer.rows(); ++k) {
    const bool fire = out.v_pre[k] > layer.theta_q();
    out.spikes.bits[k] = fire;
    out.state.v[k] = out.v_pre[k] - std::int64_t{layer.theta_q()} * (fire ? 1 : 0);
  }
  return out;
}

QuantizedModel quantize_model(const Network& net, int bits, double theta) {
  QuantizedModel model{net.preset_id, net.model, net.input_size(), {}};
  for (const auto& l : net.layers) model.layers.push_back(quantize_layer(l, bits, theta));
  return model;
}

QuantRun quantized_run(const QuantizedModel& model, std::span<const SpikeFrame> inputs) {
  std::vector<IntNeuronState> states;
  for (const auto& l : model.layers) states.push_back(IntNeuronState::zeros(l.rows()));
  QuantRun run;
  for (const auto& frame : inputs) {
    auto& outs = run.layer_outputs.emplace_back();
    SpikeFrame x = frame;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      std::vector<std::int64_t> v;
      if (model.model == NeuronModel::dc) {
        auto r = quantized_forward_dc(x, model.layers[l]);
        x = std::move(r.spikes);
        v = std::move(r.v);
      } else {
        auto r = quantized_forward_ct(x, model.layers[l], states[l]);
        x = std::move(r.spikes);
        v = std::move(r.v_pre);
        states[l] = std::move(r.state);
      }
      outs.push_back(x);
      if (l + 1 == model.layers.size()) run.readout_v.push_back(std::move(v));
    }
  }
  return run;
}

namespace {

constexpr char kMagic[8] = {'D', 'T', 'S', 'N', 'N', 'Q', 'N', 'T'};
constexpr std::uint32_t kQuantVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_quantized(const QuantizedModel& model) {
  detail::ByteWriter w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put(kQuantVersion);
  w.put(static_cast<std::uint8_t>(model.model));
  w.put_string(model.preset_id);
  w.put(static_cast<std::uint32_t>(model.input_size));
  w.put(static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    w.put(static_cast<std::uint8_t>(l.bits()));
    w.put(l.scale());
    w.put(l.theta_q());
    w.put(static_cast<std::uint32_t>(l.rows()));
    w.put(static_cast<std::uint32_t>(l.cols()));
    for (auto q : l.weights()) w.put(static_cast<std::int8_t>(q));
    for (auto b : l.bias()) w.put(b);
  }
  return w.bytes();
}

QuantizedModel parse_quantized(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "quantized model");
  char magic[8];
  r.get_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError("not a dtsnn quantized model (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kQuantVersion) {
    throw FormatError("quantized model version " + std::to_string(version) + " is not supported");
  }
  QuantizedModel model;
  const auto kind = r.get<std::uint8_t>();
  if (kind > 1) throw FormatError("quantized model: unknown neuron model");
  model.model = static_cast<NeuronModel>(kind);
  model.preset_id = r.get_string();
  model.input_size = r.get<std::uint32_t>();
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers == 0 || n_layers > 64) throw FormatError("quantized model: bad layer count");
  std::size_t expected_in = model.input_size;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const int bits = r.get<std::uint8_t>();
    const auto scale = r.get<double>();
    const auto theta_q = r.get<std::int32_t>();
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (cols != expected_in) {
      throw FormatError("quantized model: layer " + std::to_string(l) + " expects " +
                        std::to_string(cols) + " inputs, previous layer gives " +
                        std::to_string(expected_in));
    }
    std::vector<std::int32_t> wq(std::size_t{rows} * cols), bq(rows);
    for (auto& q : wq) q = r.get<std::int8_t>();
    for (auto& b : bq) b = r.get<std::int32_t>();
    model.layers.emplace_back(rows, cols, std::move(wq), std::move(bq), scale, theta_q, bits);
    expected_in = rows;
  }
  if (!r.at_end()) throw FormatError("quantized model: trailing bytes after payload");
  return model;
}

void save_quantized(const QuantizedModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_quantized(model));
}

QuantizedModel load_quantized(const std::filesystem::path& path) {
  return parse_quantized(read_file_bytes(path));
}

namespace {

template <class Values>
std::size_t vote(const Values& values, const SweepOptions& opts) {
  if (opts.label_offset + opts.label_width > values.size()) {
    throw ValidationError("label window exceeds the output width");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < opts.label_width; ++i) {
    if (values[opts.label_offset + i] > values[opts.label_offset + best]) best = i;
  }
  return best;
}

}  // namespace

std::size_t float_predict(const Network& net, const LabeledFrames& sample,
                          const SweepOptions& opts) {
  std::vector<double> score(net.output_size(), 0.0);
  if (net.model == NeuronModel::dc) {
    for (const auto& f : sample.frames) {
      const auto pass = forward_dc(net, f.to_tensor<float>(), opts.theta);
      for (std::size_t k = 0; k < score.size(); ++k) score[k] += pass.output_potential[k];
    }
  } else {
    std::vector<Tensor> inputs;
    for (const auto& f : sample.frames) inputs.push_back(f.to_tensor<float>());
    const auto pass = forward_ct<float>(net, inputs, opts.theta);
    for (std::size_t k = 0; k < score.size(); ++k) score[k] = pass.counts[k];
  }
  return vote(score, opts);
}

std::size_t quantized_predict(const QuantizedModel& model, const LabeledFrames& sample,
                              const SweepOptions& opts) {
  const auto run = quantized_run(model, sample.frames);
  std::vector<std::int64_t> score(model.output_size(), 0);
  for (std::size_t t = 0; t < sample.frames.size(); ++t) {
    for (std::size_t k = 0; k < score.size(); ++k) {
      score[k] += model.model == NeuronModel::dc ? run.readout_v[t][k]
                                                 : run.layer_outputs[t].back().bits[k];
    }
  }
  return vote(score, opts);
}

double float_accuracy(const Network& net, std::span<const LabeledFrames> data,
                      const SweepOptions& opts) {
  std::size_t ok = 0;
  for (const auto& s : data) ok += float_predict(net, s, opts) == static_cast<std::size_t>(s.label);
  return data.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(data.size());
}

std::vector<SweepRow> precision_sweep(const Network& net, std::span<const LabeledFrames> data,
                                      std::span<const int> bits_list, const SweepOptions& opts) {
  std::vector<std::size_t> reference;
  reference.reserve(data.size());
  for (const auto& s : data) reference.push_back(float_predict(net, s, opts));
  std::vector<SweepRow> rows;
  for (int bits : bits_list) {
    const auto model = quantize_model(net, bits, opts.theta);
    std::size_t ok = 0, agree = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto pred = quantized_predict(model, data[i], opts);
      ok += pred == static_cast<std::size_t>(data[i].label);
      agree += pred == reference[i];
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, data.size()));
    rows.push_back({bits, static_cast<double>(ok) / n, static_cast<double>(agree) / n});
  }
  return rows;
}

}  // namespace dtsnn
