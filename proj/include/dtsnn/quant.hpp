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

#ifndef DTSNN_QUANT_HPP_
#define DTSNN_QUANT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtsnn/network.hpp"

namespace dtsnn {

inline constexpr int kAccumulatorBits = 24;
inline constexpr std::int64_t kAccumulatorMax = (std::int64_t{1} << (kAccumulatorBits - 1)) - 1;
inline constexpr std::int64_t kAccumulatorMin = -(std::int64_t{1} << (kAccumulatorBits - 1));

// Dense layer with B-bit two's-complement weights sharing one scale. Bias
// and threshold are integers at the same scale.
class QuantizedLayer {
 public:
  // Throws ValidationError if a weight falls outside the B-bit range, bits is
  // outside [2, 8], theta_q < 1, or the shapes disagree.
  QuantizedLayer(std::size_t rows, std::size_t cols, std::vector<std::int32_t> weights_q,
                 std::vector<std::int32_t> bias_q, double scale, std::int32_t theta_q,
                 int bits);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const std::int32_t> weights() const { return weights_q_; }
  std::int32_t weight(std::size_t out, std::size_t in) const { return weights_q_[out * cols_ + in]; }
  std::span<const std::int32_t> bias() const { return bias_q_; }
  double scale() const { return scale_; }
  std::int32_t theta_q() const { return theta_q_; }
  int bits() const { return bits_; }

  std::int32_t max_weight() const { return (1 << (bits_ - 1)) - 1; }
  std::int32_t min_weight() const { return -(1 << (bits_ - 1)); }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::int32_t> weights_q_;  // rows x cols, row-major
  std::vector<std::int32_t> bias_q_;
  double scale_;
  std::int32_t theta_q_;
  int bits_;
};

// Symmetric per-layer quantization: scale = max|w| / (2^(B-1) - 1),
// w_q = round(w / scale); an all-zero layer uses scale 1.
QuantizedLayer quantize_layer(const LayerParams& params, int bits, double theta = 1.0);

struct IntNeuronState {
  std::vector<std::int64_t> v;

  static IntNeuronState zeros(std::size_t n) { return {std::vector<std::int64_t>(n, 0)}; }
};

struct QuantDcOutput {
  SpikeFrame spikes;
  std::vector<std::int64_t> v;
};

// Integer mirror of the DC layer: accumulate the weight columns of active
// inputs in ascending order, add the bias, fire iff v > theta_q. Throws
// NumericError when the 24-bit accumulator would overflow.
QuantDcOutput quantized_forward_dc(const SpikeFrame& spikes_in, const QuantizedLayer& layer);

struct QuantCtOutput {
  SpikeFrame spikes;
  std::vector<std::int64_t> v_pre;
  IntNeuronState state;  // v_post
};

// Integer mirror of the CT step; on a spike v is decremented by theta_q.
QuantCtOutput quantized_forward_ct(const SpikeFrame& spikes_in, const QuantizedLayer& layer,
                                   const IntNeuronState& state);

struct QuantizedModel {
  std::string preset_id;
  NeuronModel model = NeuronModel::dc;
  std::size_t input_size = 0;
  std::vector<QuantizedLayer> layers;

  std::size_t output_size() const { return layers.back().rows(); }
  int bits() const { return layers.front().bits(); }
};

// Dense-only networks; conv/pool layers are rejected with ValidationError.
QuantizedModel quantize_model(const Network& net, int bits, double theta = 1.0);

// Non-pipelined reference run of a whole model over T input frames.
struct QuantRun {
  std::vector<std::vector<SpikeFrame>> layer_outputs;  // [t][layer]
  std::vector<std::vector<std::int64_t>> readout_v;    // [t] last-layer v (v_pre for CT)
};

QuantRun quantized_run(const QuantizedModel& model, std::span<const SpikeFrame> inputs);

// Quantized model file: "DTSNNQNT" | u32 version | u8 model | str preset |
// u32 input size | u32 layers | per layer: u8 bits, f64 scale, i32 theta_q,
// u32 rows, u32 cols, i8 weights[rows * cols], i32 bias[rows]. Little-endian.
std::vector<std::uint8_t> serialize_quantized(const QuantizedModel& model);
QuantizedModel parse_quantized(std::span<const std::uint8_t> bytes);
void save_quantized(const QuantizedModel& model, const std::filesystem::path& path);
QuantizedModel load_quantized(const std::filesystem::path& path);

struct LabeledFrames {
  std::vector<SpikeFrame> frames;
  int label = -1;
};

struct SweepOptions {
  std::size_t label_offset = 0;  // outputs [offset, offset + width) vote
  std::size_t label_width = 10;
  double theta = 1.0;
};

struct SweepRow {
  int bits = 0;
  double accuracy = 0.0;
  double agreement = 0.0;  // fraction matching the float prediction
};

// Predictions: DC sums readout potentials over the frames, CT counts output
// spikes; argmax over the label window, ties to the lowest index.
std::size_t float_predict(const Network& net, const LabeledFrames& sample,
                          const SweepOptions& opts);
std::size_t quantized_predict(const QuantizedModel& model, const LabeledFrames& sample,
                              const SweepOptions& opts);

double float_accuracy(const Network& net, std::span<const LabeledFrames> data,
                      const SweepOptions& opts);

// Quantizes at every bit width and evaluates on the same fixed frames.
std::vector<SweepRow> precision_sweep(const Network& net, std::span<const LabeledFrames> data,
                                      std::span<const int> bits_list,
                                      const SweepOptions& opts = {});

}  // namespace dtsnn

#endif  // DTSNN_QUANT_HPP_
