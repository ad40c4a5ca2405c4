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

#include <doctest.h>

#include "dtsnn/errors.hpp"
#include "dtsnn/quant.hpp"
#include "test_util.hpp"

using namespace dtsnn;

namespace {

LayerParams random_dense(std::size_t out, std::size_t in, Rng& rng, double bias_lo = -0.5,
                         double bias_hi = 1.5) {
  auto p = LayerParams::dense(out, in);
  glorot_init(p, rng);
  for (auto& b : p.bias.data) b = static_cast<float>(uniform(rng, bias_lo, bias_hi));
  return p;
}

SpikeFrame random_frame(std::size_t n, double p, Rng& rng) {
  SpikeFrame f(n);
  for (auto& b : f.bits) b = bernoulli(rng, p);
  return f;
}

SpikeFrame bits(std::vector<std::uint8_t> b) { return SpikeFrame(std::move(b), 0); }

QuantizedLayer single_weight(std::int32_t w, std::int32_t bias, std::int32_t theta_q) {
  return QuantizedLayer(1, 1, {w}, {bias}, 0.1, theta_q, 8);
}

}  // namespace

TEST_CASE("largest weight maps to the top code, zero to zero") {
  auto p = LayerParams::dense(2, 2);
  p.weights.data = {0.25f, -0.1f, 0.0f, 0.5f};
  const auto q = quantize_layer(p, 7);
  CHECK(q.weight(1, 1) == 63);
  CHECK(q.weight(1, 0) == 0);
  CHECK(q.scale() == doctest::Approx(0.5 / 63));
  CHECK(q.theta_q() == 126);

  auto neg = LayerParams::dense(1, 2);
  neg.weights.data = {-0.8f, 0.2f};
  CHECK(quantize_layer(neg, 7).weight(0, 0) == -63);
}

TEST_CASE("all-zero layer quantizes with unit scale") {
  const auto q = quantize_layer(LayerParams::dense(3, 4), 5);
  CHECK(q.scale() == 1.0);
  CHECK(q.theta_q() == 1);
  for (auto w : q.weights()) CHECK(w == 0);
}

TEST_CASE("dequantization error is at most half a step") {
  Rng rng(3);
  for (int bits = 2; bits <= 8; ++bits) {
    const auto p = random_dense(16, 40, rng);
    const auto q = quantize_layer(p, bits);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      const double err = std::abs(q.weights()[i] * q.scale() - p.weights[i]);
      CHECK(err <= q.scale() / 2 * (1 + 1e-12));
    }
    for (std::size_t k = 0; k < p.bias.size(); ++k) {
      CHECK(std::abs(q.bias()[k] * q.scale() - p.bias[k]) <= q.scale() / 2 * (1 + 1e-12));
    }
    CHECK(q.theta_q() == std::max(1L, std::lround(1.0 / q.scale())));
  }
}

TEST_CASE("layer construction validates its ranges") {
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {64}, {0}, 0.1, 10, 7), ValidationError);
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {-65}, {0}, 0.1, 10, 7), ValidationError);
  CHECK_NOTHROW(QuantizedLayer(1, 1, {-64}, {0}, 0.1, 10, 7));
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {1}, {0}, 0.1, 0, 7), ValidationError);
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {1}, {0}, 0.1, 1, 9), ValidationError);
  CHECK_THROWS_AS(QuantizedLayer(1, 2, {1}, {0}, 0.1, 1, 7), ValidationError);
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {1}, {0}, 0.0, 1, 7), ValidationError);
  CHECK_THROWS_AS(quantize_layer(LayerParams::conv(2, 1), 7), ValidationError);
  CHECK_THROWS_AS(quantize_layer(LayerParams::dense(2, 2), 1), ValidationError);
}

TEST_CASE("integer dc layer basics") {
  const QuantizedLayer q(2, 3, {1, 2, 3, 4, 5, 6}, {0, 0}, 0.1, 5, 8);
  auto out = quantized_forward_dc(SpikeFrame(3), q);
  CHECK(out.spikes.popcount() == 0);
  CHECK(out.v == std::vector<std::int64_t>{0, 0});

  out = quantized_forward_dc(bits({1, 0, 1}), q);
  CHECK(out.v == std::vector<std::int64_t>{4, 10});
  CHECK(out.spikes.bits == std::vector<std::uint8_t>{0, 1});

  const QuantizedLayer strict(1, 1, {5}, {0}, 0.1, 5, 8);
  CHECK(quantized_forward_dc(bits({1}), strict).spikes.bits[0] == 0);
  CHECK_THROWS_AS(quantized_forward_dc(SpikeFrame(4), q), DimensionError);
}

TEST_CASE("integer ct step examples") {
  const auto q = single_weight(9, 0, 10);
  auto out = quantized_forward_ct(bits({1}), q, IntNeuronState{{4}});
  CHECK(out.v_pre[0] == 13);
  CHECK(out.spikes.bits[0] == 1);
  CHECK(out.state.v[0] == 3);

  out = quantized_forward_ct(bits({0}), single_weight(9, 0, 10), IntNeuronState{{0}});
  CHECK(out.state.v[0] == 0);
  CHECK(out.spikes.bits[0] == 0);

  CHECK_THROWS_AS(quantized_forward_ct(bits({1}), q, IntNeuronState{{0, 0}}),
                  DimensionError);
}

TEST_CASE("accumulator overflow raises") {
  const auto q = single_weight(1, 0, 10);
  CHECK_THROWS_AS(quantized_forward_ct(bits({1}), q, IntNeuronState{{kAccumulatorMax}}),
                  NumericError);
  CHECK_NOTHROW(quantized_forward_ct(bits({1}), q, IntNeuronState{{kAccumulatorMax - 1}}));
  CHECK_THROWS_AS(QuantizedLayer(1, 1, {1}, {kAccumulatorMax + 1}, 0.1, 1, 8), ValidationError);
}

TEST_CASE("integer potentials track float within the rounding bound") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = random_dense(20, 60, rng);
    const int bits = 2 + static_cast<int>(uniform_index(rng, 7));
    const auto q = quantize_layer(p, bits);
    const auto in = random_frame(60, 0.3, rng);
    const auto vf = dense_forward(in.to_tensor<float>(), p);
    const auto out = quantized_forward_dc(in, q);
    const double bound = static_cast<double>(in.popcount() + 1) * q.scale() / 2;
    for (std::size_t k = 0; k < 20; ++k) {
      CHECK(std::abs(out.v[k] * q.scale() - vf[k]) <= bound * (1 + 1e-6) + 1e-6);
    }
  }
}

TEST_CASE("firing agrees with float outside the rounding band") {
  Rng rng(13);
  std::size_t compared = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = random_dense(16, 30, rng);
    const auto q = quantize_layer(p, 7);
    const auto in = random_frame(30, 0.4, rng);
    const auto vf = dense_forward(in.to_tensor<float>(), p);
    const auto out = quantized_forward_dc(in, q);
    // The threshold itself is rounded too, which widens the band by half a step.
    const double band = static_cast<double>(in.popcount() + 2) * q.scale() / 2;
    for (std::size_t k = 0; k < 16; ++k) {
      if (std::abs(vf[k] - 1.0) <= band) continue;
      CHECK(out.spikes.bits[k] == (vf[k] > 1.0f ? 1 : 0));
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("quantized model file round trip") {
  Rng rng(5);
  auto net = build_mlp<float>("m", NeuronModel::ct, {30, 12, 4}, rng);
  const auto q = quantize_model(net, 6);
  const auto bytes = serialize_quantized(q);
  const auto back = parse_quantized(bytes);
  CHECK(back.preset_id == "m");
  CHECK(back.model == NeuronModel::ct);
  CHECK(back.input_size == 30);
  REQUIRE(back.layers.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(std::vector<std::int32_t>(back.layers[l].weights().begin(), back.layers[l].weights().end()) ==
          std::vector<std::int32_t>(q.layers[l].weights().begin(), q.layers[l].weights().end()));
    CHECK(back.layers[l].scale() == q.layers[l].scale());
    CHECK(back.layers[l].theta_q() == q.layers[l].theta_q());
    CHECK(back.layers[l].bits() == 6);
  }
  CHECK(serialize_quantized(back) == bytes);
  CHECK_THROWS_AS(parse_quantized(std::span(bytes).first(bytes.size() - 3)), FormatError);
  auto bad = bytes;
  bad[0] = 'Q';
  CHECK_THROWS_AS(parse_quantized(bad), FormatError);
}

TEST_CASE("quantized run chains the per-layer references") {
  Rng rng(17);
  auto net = build_mlp<float>("m", NeuronModel::ct, {20, 10, 3}, rng);
  const auto q = quantize_model(net, 7);
  std::vector<SpikeFrame> in;
  for (std::size_t t = 0; t < 4; ++t) in.push_back(random_frame(20, 0.5, rng));
  const auto run = quantized_run(q, in);
  std::vector<IntNeuronState> st = {IntNeuronState::zeros(10), IntNeuronState::zeros(3)};
  for (std::size_t t = 0; t < 4; ++t) {
    auto a = quantized_forward_ct(in[t], q.layers[0], st[0]);
    auto b = quantized_forward_ct(a.spikes, q.layers[1], st[1]);
    CHECK(run.layer_outputs[t][0] == a.spikes);
    CHECK(run.layer_outputs[t][1] == b.spikes);
    CHECK(run.readout_v[t] == b.v_pre);
    st = {a.state, b.state};
  }
}

TEST_CASE("precision sweep plumbing on an untrained model") {
  Rng rng(19);
  auto net = build_mlp<float>("m", NeuronModel::dc, {25, 8, 10}, rng);
  std::vector<LabeledFrames> data;
  for (int i = 0; i < 30; ++i) data.push_back({{random_frame(25, 0.5, rng)}, i % 10});
  const std::vector<int> bits = {2, 3, 4, 5, 6, 7, 8};
  const auto rows = precision_sweep(net, data, bits);
  REQUIRE(rows.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(rows[i].bits == bits[i]);
    CHECK(rows[i].accuracy >= 0);
    CHECK(rows[i].accuracy <= 1);
  }
  Rng rng2(1);
  auto conv = build_network<float>(find_preset("conv"), rng2);
  CHECK_THROWS_AS(quantize_model(conv, 7), ValidationError);
}
