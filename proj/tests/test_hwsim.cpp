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

#include <fstream>
#include <sstream>

#include "dtsnn/errors.hpp"
#include "dtsnn/hwsim.hpp"
#include "test_util.hpp"

using namespace dtsnn;

namespace {

SpikeFrame bits(std::vector<std::uint8_t> b) { return SpikeFrame(std::move(b), 0); }

SpikeFrame frame_with_k(std::size_t n, std::size_t k, Rng& rng) {
  SpikeFrame f(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(std::span(idx), rng);
  for (std::size_t i = 0; i < k; ++i) f.bits[idx[i]] = 1;
  return f;
}

QuantizedModel random_model(NeuronModel model, const std::vector<std::size_t>& sizes, int bits,
                            Rng& rng) {
  auto net = build_mlp<float>("sim", model, sizes, rng);
  for (auto& l : net.layers) {
    for (auto& b : l.bias.data) b = static_cast<float>(uniform(rng, -0.2, 0.8));
  }
  return quantize_model(net, bits);
}

std::vector<SpikeFrame> random_inputs(std::size_t n, std::size_t steps, double p, Rng& rng) {
  std::vector<SpikeFrame> out;
  for (std::size_t t = 0; t < steps; ++t) {
    SpikeFrame f(n, t);
    for (auto& b : f.bits) b = bernoulli(rng, p);
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("priority encoder scan") {
  SchedulerState s({0, 1, 0, 1});
  CHECK(priority_encode_next(s) == 1u);
  CHECK(priority_encode_next(s) == 3u);
  CHECK(!priority_encode_next(s).has_value());

  SchedulerState zero({0, 0, 0});
  CHECK(!zero.has_next());
  CHECK(!priority_encode_next(zero).has_value());

  SchedulerState ones({1, 1, 1, 1});
  for (std::size_t i = 0; i < 4; ++i) CHECK(priority_encode_next(ones) == i);
  CHECK(!ones.has_next());
}

TEST_CASE("priority encoder matches a brute-force scan") {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::uint8_t> v(1 + uniform_index(rng, 40));
    for (auto& b : v) b = bernoulli(rng, 0.3);
    SchedulerState s(v);
    std::vector<std::size_t> got, want;
    while (auto i = priority_encode_next(s)) got.push_back(*i);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i]) want.push_back(i);
    }
    CHECK(got == want);
  }
}

TEST_CASE("engine integrates one index per cycle") {
  const QuantizedLayer q(2, 8, std::vector<std::int32_t>(16, 1), {0, 5}, 0.1, 3, 8);
  SimConfig cfg;
  auto counters = ActivityCounters::for_layers(1, 1);
  LayerEngine e(0, q, NeuronModel::dc, cfg);
  e.latch(bits({1, 1, 0, 1, 0, 1, 1, 0}));
  std::vector<EnginePhase> phases;
  std::vector<std::size_t> consumed;
  std::optional<SpikeFrame> out;
  while (!out) {
    auto r = e.cycle(counters);
    phases.push_back(r.phase);
    if (r.index) consumed.push_back(*r.index);
    out = std::move(r.output);
  }
  CHECK(phases.size() == 5 + 4);
  CHECK(std::count(phases.begin(), phases.end(), EnginePhase::integrating) == 5);
  CHECK(consumed == std::vector<std::size_t>{0, 1, 3, 5, 6});
  CHECK(counters.weight_row_fetches[0] == 5);
  CHECK(counters.accumulate_ops[0] == 10);
  CHECK(counters.fire_checks[0] == 2);
  CHECK(out->bits == std::vector<std::uint8_t>{1, 1});
  CHECK(e.last_fire_v() == std::vector<std::int64_t>{5, 10});
  CHECK(e.membrane() == std::vector<std::int64_t>{0, 0});
  CHECK(e.phase() == EnginePhase::idle);
}

TEST_CASE("engine with no input still runs bias and fire") {
  const QuantizedLayer q(1, 4, {1, 1, 1, 1}, {20}, 0.1, 10, 8);
  auto counters = ActivityCounters::for_layers(1, 1);
  LayerEngine e(0, q, NeuronModel::dc, SimConfig{});
  e.latch(SpikeFrame(4));
  int cycles = 0;
  std::optional<SpikeFrame> out;
  while (!out) {
    auto r = e.cycle(counters);
    CHECK(r.phase != EnginePhase::integrating);
    out = std::move(r.output);
    ++cycles;
  }
  CHECK(cycles == 4);
  CHECK(out->bits[0] == 1);
  CHECK(counters.integrating_cycles[0] == 0);
}

TEST_CASE("engine rejects misuse") {
  const QuantizedLayer q(1, 4, {1, 1, 1, 1}, {0}, 0.1, 10, 8);
  LayerEngine e(0, q, NeuronModel::dc, SimConfig{});
  CHECK_THROWS_AS(e.latch(SpikeFrame(5)), DimensionError);
  e.latch(SpikeFrame(4));
  CHECK_THROWS_AS(e.latch(SpikeFrame(4)), SimulatorError);
}

TEST_CASE("ct engine keeps its membrane across steps") {
  Rng rng(4);
  const auto model = random_model(NeuronModel::ct, {12, 6}, 7, rng);
  const auto in = random_inputs(12, 2, 0.5, rng);
  const auto sim = pipeline_simulate(model, in);
  IntNeuronState st = IntNeuronState::zeros(6);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto ref = quantized_forward_ct(in[t], model.layers[0], st);
    CHECK(sim.layer_outputs[t][0] == ref.spikes);
    CHECK(sim.readout_v[t] == ref.v_pre);
    st = ref.state;
  }
}

TEST_CASE("single layer single step takes k + 4 cycles") {
  Rng rng(6);
  const auto model = random_model(NeuronModel::dc, {40, 5}, 7, rng);
  for (std::size_t k : {0u, 1u, 5u, 17u, 40u}) {
    const std::vector<SpikeFrame> in = {frame_with_k(40, k, rng)};
    const auto r = pipeline_simulate(model, in);
    CHECK(r.counters.total_cycles == k + 4);
    CHECK(r.counters.integrating_cycles[0] == k);
    CHECK(r.counters.weight_row_fetches[0] == k);
  }
}

TEST_CASE("phase lengths are configurable") {
  Rng rng(6);
  const auto model = random_model(NeuronModel::dc, {10, 3}, 7, rng);
  SimConfig cfg;
  cfg.latch_cycles = 2;
  cfg.bias_fire_cycles = 3;
  cfg.handshake_cycles = 1;
  const std::vector<SpikeFrame> in = {frame_with_k(10, 4, rng)};
  CHECK(pipeline_simulate(model, in, cfg).counters.total_cycles == 4 + 6);
  cfg.bias_fire_cycles = 0;
  CHECK_THROWS_AS(pipeline_simulate(model, in, cfg), ValidationError);
}

TEST_CASE("all-zero input costs T times the overhead") {
  Rng rng(8);
  const auto model = random_model(NeuronModel::dc, {16, 4}, 7, rng);
  for (std::size_t T : {1u, 2u, 7u}) {
    std::vector<SpikeFrame> in(T, SpikeFrame(16));
    CHECK(pipeline_simulate(model, in).counters.total_cycles == 4 * T);
  }
}

TEST_CASE("pipelining overlaps layers") {
  Rng rng(10);
  const auto model = random_model(NeuronModel::ct, {30, 20, 20, 5}, 7, rng);
  const auto in = random_inputs(30, 6, 0.3, rng);
  const auto r = pipeline_simulate(model, in);
  const auto ref = quantized_run(model, in);
  std::uint64_t serial = 0;
  for (std::size_t t = 0; t < in.size(); ++t) {
    serial += in[t].popcount() + 4;
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
      serial += ref.layer_outputs[t][l].popcount() + 4;
    }
  }
  CHECK(r.counters.total_cycles < serial);
  CHECK(r.layer_outputs == ref.layer_outputs);
}

TEST_CASE("row fetches equal the popcount census of layer inputs") {
  Rng rng(12);
  const auto model = random_model(NeuronModel::dc, {25, 15, 10}, 6, rng);
  const auto in = random_inputs(25, 5, 0.4, rng);
  const auto r = pipeline_simulate(model, in);
  const auto ref = quantized_run(model, in);
  std::uint64_t l0 = 0, l1 = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    l0 += in[t].popcount();
    l1 += ref.layer_outputs[t][0].popcount();
    CHECK(r.counters.active_spikes[0][t] == in[t].popcount());
    CHECK(r.counters.active_spikes[1][t] == ref.layer_outputs[t][0].popcount());
  }
  CHECK(r.counters.weight_row_fetches[0] == l0);
  CHECK(r.counters.weight_row_fetches[1] == l1);
  CHECK(r.counters.accumulate_ops[1] == l1 * 10);
  CHECK(r.counters.fire_checks[0] == 5 * 15);
}

TEST_CASE("undrained output deadlocks with a diagnostic") {
  Rng rng(14);
  const auto model = random_model(NeuronModel::dc, {8, 4, 3}, 7, rng);
  SimConfig cfg;
  cfg.drain_output = false;
  const auto one = random_inputs(8, 1, 0.5, rng);
  CHECK_NOTHROW(pipeline_simulate(model, one, cfg));
  const auto three = random_inputs(8, 3, 0.5, rng);
  try {
    pipeline_simulate(model, three, cfg);
    FAIL("expected a deadlock");
  } catch (const SimulatorError& e) {
    CHECK(std::string(e.what()).find("deadlock") != std::string::npos);
    CHECK(std::string(e.what()).find("idle") != std::string::npos);
  }
}

TEST_CASE("inputs must be binary") {
  Rng rng(1);
  const auto model = random_model(NeuronModel::dc, {4, 2}, 7, rng);
  std::vector<SpikeFrame> in = {bits({0, 2, 0, 1})};
  CHECK_THROWS_AS(pipeline_simulate(model, in), ValidationError);
}

TEST_CASE("trace is one line per layer per cycle and deterministic") {
  Rng rng(16);
  const auto model = random_model(NeuronModel::ct, {10, 6, 2}, 7, rng);
  const auto in = random_inputs(10, 3, 0.5, rng);
  std::ostringstream a, b;
  SimConfig cfg;
  cfg.trace = &a;
  const auto r = pipeline_simulate(model, in, cfg);
  cfg.trace = &b;
  pipeline_simulate(model, in, cfg);
  CHECK(a.str() == b.str());
  std::istringstream lines(a.str());
  std::string line;
  std::size_t n = 0, integrating = 0;
  while (std::getline(lines, line)) {
    std::istringstream f(line);
    std::uint64_t cycle;
    std::size_t layer;
    std::string phase, index;
    REQUIRE(static_cast<bool>(f >> cycle >> layer >> phase >> index));
    CHECK(cycle == n / 2);
    CHECK(layer == n % 2);
    if (phase == "integrating") {
      ++integrating;
      CHECK(index != "-");
    } else {
      CHECK(index == "-");
    }
    ++n;
  }
  CHECK(n == 2 * r.counters.total_cycles);
  CHECK(integrating == r.counters.weight_row_fetches[0] + r.counters.weight_row_fetches[1]);
}

TEST_CASE("adding a spike never shortens the run") {
  Rng rng(18);
  for (int rep = 0; rep < 30; ++rep) {
    const auto model = random_model(NeuronModel::dc, {12, 8, 3}, 7, rng);
    auto in = random_inputs(12, 3, 0.3, rng);
    const auto before = pipeline_simulate(model, in).counters.total_cycles;
    const std::size_t t = uniform_index(rng, 3);
    const std::size_t i = uniform_index(rng, 12);
    in[t].bits[i] = 1;
    CHECK(pipeline_simulate(model, in).counters.total_cycles >= before);
  }
}

TEST_CASE("sparsity report") {
  Rng rng(20);
  const auto model = random_model(NeuronModel::dc, {10, 6, 3}, 7, rng);
  std::vector<SpikeFrame> zeros(4, SpikeFrame(10));
  auto r = pipeline_simulate(model, zeros);
  CHECK(report_sparsity(r.counters, model, 4).per_layer[0] == 0.0);

  std::vector<SpikeFrame> ones(4, SpikeFrame(std::vector<std::uint8_t>(10, 1), 0));
  r = pipeline_simulate(model, ones);
  const auto rep = report_sparsity(r.counters, model, 4);
  CHECK(rep.per_layer[0] == 1.0);

  const auto ref = quantized_run(model, ones);
  double active = 40, capacity = 40 + 6 * 4;
  std::size_t hidden = 0;
  for (std::size_t t = 0; t < 4; ++t) hidden += ref.layer_outputs[t][0].popcount();
  active += static_cast<double>(hidden);
  CHECK(rep.per_layer[1] == static_cast<double>(hidden) / 24.0);
  CHECK(rep.aggregate == active / capacity);
  const std::vector<std::size_t> wrong = {10};
  CHECK_THROWS_AS(report_sparsity(r.counters, wrong, 4), DimensionError);
}

TEST_CASE("energy model") {
  ActivityCounters c = ActivityCounters::for_layers(2, 1);
  c.total_cycles = 1780;
  c.weight_row_fetches = {10, 4};
  c.accumulate_ops = {100, 12};
  c.fire_checks = {8, 3};
  c.stall_cycles = {2, 9};

  EnergyCoefficients zero{0, 0, 0, 0, 163};
  CHECK(estimate_energy(c, zero).total_nj == 0.0);

  EnergyCoefficients k{0.5, 0.25, 0.125, 1.0, 163};
  const auto e = estimate_energy(c, k);
  CHECK(e.per_layer_nj[0] == 5 + 25 + 1 + 2);
  CHECK(e.per_layer_nj[1] == 2 + 3 + 0.375 + 9);
  CHECK(e.total_nj == e.per_layer_nj[0] + e.per_layer_nj[1]);
  CHECK(e.wall_time_us == doctest::Approx(10.92).epsilon(1e-3));
  CHECK(wall_time_us(1780, 163) == doctest::Approx(1780.0 / 163.0));

  ActivityCounters twice = c;
  twice.total_cycles *= 2;
  for (std::size_t l = 0; l < 2; ++l) {
    twice.weight_row_fetches[l] *= 2;
    twice.accumulate_ops[l] *= 2;
    twice.fire_checks[l] *= 2;
    twice.stall_cycles[l] *= 2;
  }
  CHECK(estimate_energy(twice, k).total_nj == 2 * e.total_nj);

  EnergyCoefficients neg{0.1, -0.1, 0, 0, 163};
  CHECK_THROWS_AS(estimate_energy(c, neg), ValidationError);
}

TEST_CASE("energy coefficients file") {
  const auto dir = testing::scratch_dir("coeffs");
  {
    std::ofstream f(dir / "c.txt");
    f << "# calibration\nrow_fetch_nj = 0.3\nfrequency_mhz=200\n";
  }
  const auto c = load_energy_coefficients(dir / "c.txt");
  CHECK(c.row_fetch_nj == 0.3);
  CHECK(c.frequency_mhz == 200);
  CHECK(c.accumulate_nj == EnergyCoefficients{}.accumulate_nj);
  {
    std::ofstream f(dir / "bad.txt");
    f << "row_fetch = 0.3\n";
  }
  CHECK_THROWS_AS(load_energy_coefficients(dir / "bad.txt"), ValidationError);
  {
    std::ofstream f(dir / "neg.txt");
    f << "idle_cycle_nj = -1\n";
  }
  CHECK_THROWS_AS(load_energy_coefficients(dir / "neg.txt"), ValidationError);
}
