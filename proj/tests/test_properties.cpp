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

#include "dtsnn/checkpoint.hpp"
#include "dtsnn/encoding.hpp"
#include "dtsnn/hwsim.hpp"
#include "dtsnn/quant.hpp"
#include "test_util.hpp"

using namespace dtsnn;

namespace {

std::vector<std::size_t> random_sizes(Rng& rng) {
  std::vector<std::size_t> s = {1 + uniform_index(rng, 48)};
  const auto depth = 1 + uniform_index(rng, 3);
  for (std::size_t i = 0; i < depth; ++i) s.push_back(1 + uniform_index(rng, 24));
  return s;
}

Network random_net(NeuronModel model, Rng& rng) {
  auto net = build_mlp<float>("prop", model, random_sizes(rng), rng);
  for (auto& l : net.layers) {
    for (auto& w : l.weights.data) w *= static_cast<float>(uniform(rng, 0.5, 4.0));
    for (auto& b : l.bias.data) b = static_cast<float>(uniform(rng, -1.0, 1.5));
  }
  return net;
}

SpikeFrame random_frame(std::size_t n, double p, Rng& rng, std::size_t step = 0) {
  SpikeFrame f(n, step);
  for (auto& b : f.bits) b = bernoulli(rng, p);
  return f;
}

}  // namespace

TEST_CASE("a ct step from rest equals the dc layer") {
  Rng rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    const auto net = random_net(NeuronModel::dc, rng);
    const auto& layer = net.layers.front();
    const auto in = random_frame(net.input_size(), uniform01(rng), rng);
    const auto [dc_spikes, dc_v] = snn_dc_layer(in, layer, 1.0);
    const auto [ct_spikes, st] =
        snn_ct_step(in, layer, NeuronState::zeros(layer.bias.shape, 1.0));
    CHECK(dc_spikes == ct_spikes);
    CHECK(dc_v.data == st.v_pre.data);
  }
}

TEST_CASE("ct membrane obeys the reset identity at every step") {
  Rng rng(103);
  for (int rep = 0; rep < 20; ++rep) {
    const auto net = random_net(NeuronModel::ct, rng);
    const auto& layer = net.layers.front();
    auto st = NeuronState::zeros(layer.bias.shape, 1.0);
    for (int t = 0; t < 50; ++t) {
      const auto in = random_frame(net.input_size(), 0.3, rng, t);
      const auto [drive_spikes, drive] = snn_dc_layer(in, layer, 1.0);
      (void)drive_spikes;
      const auto prev = st.v_post;
      const auto [s, next] = snn_ct_step(in, layer, st);
      for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(next.v_pre[i] == drive[i] + prev[i]);
        CHECK(next.v_post[i] == next.v_pre[i] - static_cast<float>(s.bits[i]));
        CHECK(s.bits[i] == (next.v_pre[i] > 1.0f ? 1 : 0));
      }
      st = next;
    }
  }
}

TEST_CASE("integer ct membrane is conserved exactly") {
  Rng rng(107);
  for (int rep = 0; rep < 20; ++rep) {
    const auto q = quantize_model(random_net(NeuronModel::ct, rng), 2 + static_cast<int>(uniform_index(rng, 7)));
    const auto& layer = q.layers.front();
    auto st = IntNeuronState::zeros(layer.rows());
    std::vector<std::int64_t> drive_sum(layer.rows(), 0), fired(layer.rows(), 0);
    for (int t = 0; t < 200; ++t) {
      const auto in = random_frame(layer.cols(), 0.2, rng, t);
      const auto dc = quantized_forward_dc(in, layer);
      const auto ct = quantized_forward_ct(in, layer, st);
      for (std::size_t i = 0; i < layer.rows(); ++i) {
        drive_sum[i] += dc.v[i];
        fired[i] += ct.spikes.bits[i];
        CHECK(ct.state.v[i] == drive_sum[i] - fired[i] * layer.theta_q());
      }
      st = ct.state;
    }
  }
}

TEST_CASE("pipeline equals the quantized reference on random models") {
  Rng rng(109);
  for (int rep = 0; rep < 40; ++rep) {
    const auto model = rep % 2 ? NeuronModel::ct : NeuronModel::dc;
    const auto q = quantize_model(random_net(model, rng), 2 + static_cast<int>(uniform_index(rng, 7)));
    std::vector<SpikeFrame> in;
    const auto T = 1 + uniform_index(rng, 6);
    for (std::size_t t = 0; t < T; ++t) in.push_back(random_frame(q.input_size, uniform01(rng), rng, t));
    const auto sim = pipeline_simulate(q, in);
    const auto ref = quantized_run(q, in);
    CHECK(sim.layer_outputs == ref.layer_outputs);
    CHECK(sim.readout_v == ref.readout_v);
    for (std::size_t l = 0; l < q.layers.size(); ++l) {
      std::uint64_t census = 0;
      for (std::size_t t = 0; t < T; ++t) {
        census += l == 0 ? in[t].popcount() : ref.layer_outputs[t][l - 1].popcount();
      }
      CHECK(sim.counters.integrating_cycles[l] == census);
    }
    CHECK(sim.counters.total_cycles >= in.front().popcount() + 4);
  }
}

TEST_CASE("sparsity stays in the unit interval") {
  Rng rng(113);
  for (int rep = 0; rep < 30; ++rep) {
    const auto q = quantize_model(random_net(NeuronModel::ct, rng), 7);
    std::vector<SpikeFrame> in;
    for (std::size_t t = 0; t < 3; ++t) in.push_back(random_frame(q.input_size, uniform01(rng), rng, t));
    const auto r = pipeline_simulate(q, in);
    const auto s = report_sparsity(r.counters, q, 3);
    for (double f : s.per_layer) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
    CHECK(s.aggregate >= 0.0);
    CHECK(s.aggregate <= 1.0);
  }
}

TEST_CASE("serialisation round trips on random models") {
  Rng rng(127);
  for (int rep = 0; rep < 20; ++rep) {
    const auto net = random_net(rep % 2 ? NeuronModel::ct : NeuronModel::dc, rng);
    const auto back = parse_checkpoint(serialize_checkpoint(net, {3, 9, 27}));
    REQUIRE(back.net.layers.size() == net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      CHECK(back.net.layers[l].weights.data == net.layers[l].weights.data);
      CHECK(back.net.layers[l].bias.data == net.layers[l].bias.data);
    }
    const auto q = quantize_model(net, 2 + static_cast<int>(uniform_index(rng, 7)));
    CHECK(serialize_quantized(parse_quantized(serialize_quantized(q))) == serialize_quantized(q));
  }
}

TEST_CASE("event streams and reversal") {
  Rng rng(131);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<EventRecord> ev;
    std::uint32_t ts = 0;
    for (std::size_t i = 0, n = uniform_index(rng, 300); i < n; ++i) {
      ts += static_cast<std::uint32_t>(uniform_index(rng, 700));
      ev.push_back({static_cast<std::uint8_t>(uniform_index(rng, 34)),
                    static_cast<std::uint8_t>(uniform_index(rng, 34)),
                    bernoulli(rng, 0.5) ? Polarity::on : Polarity::off, ts});
    }
    CHECK(parse_aer_events(serialize_aer_events(ev)) == ev);

    const auto seq = bin_events_to_frames(ev, 1 + uniform_index(rng, 20), 100000,
                                          PolarityFilter::both, 34);
    const auto twice = reverse_time_augment(reverse_time_augment(seq));
    CHECK(twice.frames == seq.frames);
    CHECK(twice.meta.direction == seq.meta.direction);
    std::size_t on_frames = 0;
    for (const auto& f : seq.frames) on_frames += f.popcount();
    CHECK(on_frames <= ev.size());
  }
}
