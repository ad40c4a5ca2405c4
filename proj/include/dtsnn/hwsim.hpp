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

#ifndef DTSNN_HWSIM_HPP_
#define DTSNN_HWSIM_HPP_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtsnn/quant.hpp"
#include "dtsnn/spiking.hpp"

namespace dtsnn {

// Scans a binary spike vector from the cursor upward, one index per call.
struct SchedulerState {
  std::vector<std::uint8_t> spike_vector;
  std::size_t cursor = 0;

  SchedulerState() = default;
  explicit SchedulerState(std::vector<std::uint8_t> spikes) : spike_vector(std::move(spikes)) {}

  bool has_next() const;
};

// Lowest set index >= cursor, or nullopt once exhausted.
std::optional<std::size_t> priority_encode_next(SchedulerState& state);

enum class EnginePhase : std::uint8_t { idle, latch, integrating, bias_fire, handshake };

std::string_view to_string(EnginePhase phase);

struct SimConfig {
  int latch_cycles = 1;
  int bias_fire_cycles = 2;
  int handshake_cycles = 1;
  // When false the output sink keeps its first frame forever; only useful
  // for exercising deadlock detection.
  bool drain_output = true;
  std::ostream* trace = nullptr;

  int overhead() const { return latch_cycles + bias_fire_cycles + handshake_cycles; }
  void validate() const;
};

struct ActivityCounters {
  std::uint64_t total_cycles = 0;
  std::vector<std::uint64_t> weight_row_fetches;
  std::vector<std::uint64_t> accumulate_ops;
  std::vector<std::uint64_t> fire_checks;
  std::vector<std::uint64_t> integrating_cycles;
  std::vector<std::uint64_t> stall_cycles;
  std::vector<std::vector<std::uint64_t>> active_spikes;  // [layer][step], input popcount

  static ActivityCounters for_layers(std::size_t layers, std::size_t steps);
  std::size_t layers() const { return weight_row_fetches.size(); }
};

// One layer of the processor: integer membrane registers, a scheduler over
// the latched input frame and the phase machine.
class LayerEngine {
 public:
  LayerEngine(std::size_t id, const QuantizedLayer& layer, NeuronModel model,
              const SimConfig& cfg);

  std::size_t id() const { return id_; }
  EnginePhase phase() const { return phase_; }
  std::size_t steps_done() const { return steps_done_; }
  const std::vector<std::int64_t>& membrane() const { return v_; }

  // Takes the frame and enters the latch phase. Throws SimulatorError unless
  // idle, DimensionError on a width mismatch.
  void latch(SpikeFrame frame);

  struct CycleResult {
    EnginePhase phase = EnginePhase::idle;  // phase this cycle was spent in
    std::optional<std::size_t> index;       // consumed presynaptic index
    std::optional<SpikeFrame> output;       // set on the last handshake cycle
  };

  // Advances one clock cycle. Idle engines do nothing.
  CycleResult cycle(ActivityCounters& counters);

  // Membrane values seen by the threshold in the most recent fire.
  const std::vector<std::int64_t>& last_fire_v() const { return fire_v_; }

 private:
  void add_checked(std::size_t k, std::int64_t delta);

  std::size_t id_;
  const QuantizedLayer* layer_;
  NeuronModel model_;
  SimConfig cfg_;
  EnginePhase phase_ = EnginePhase::idle;
  int phase_cycle_ = 0;
  SchedulerState scheduler_;
  std::size_t step_ = 0;
  std::size_t steps_done_ = 0;
  std::vector<std::int64_t> v_;
  std::vector<std::int64_t> fire_v_;
  SpikeFrame pending_;
};

struct SimResult {
  std::vector<std::vector<SpikeFrame>> layer_outputs;  // [t][layer]
  std::vector<std::vector<std::int64_t>> readout_v;    // [t]
  ActivityCounters counters;
};

// Runs T input frames through the layer pipeline. Layer l starts a step once
// its inbox holds a frame and the inbox of layer l+1 is empty. Throws
// SimulatorError on a handshake violation or when no engine can advance
// while work remains.
SimResult pipeline_simulate(const QuantizedModel& model, std::span<const SpikeFrame> inputs,
                            const SimConfig& cfg = {});

struct SparsityReport {
  std::vector<double> per_layer;
  double aggregate = 0.0;
};

// Fraction of presynaptic neurons active per layer per step:
// row fetches / (fan_in * steps).
SparsityReport report_sparsity(const ActivityCounters& counters,
                               std::span<const std::size_t> fan_in, std::size_t steps);
SparsityReport report_sparsity(const ActivityCounters& counters, const QuantizedModel& model,
                               std::size_t steps);

// Linear activity model. The defaults are illustrative only.
struct EnergyCoefficients {
  double row_fetch_nj = 0.02;
  double accumulate_nj = 0.0005;
  double fire_check_nj = 0.0002;
  double idle_cycle_nj = 0.001;
  double frequency_mhz = 163.0;

  void validate() const;
};

// Flat key=value file with the field names above; missing keys keep defaults.
EnergyCoefficients load_energy_coefficients(const std::filesystem::path& path);

struct EnergyReport {
  double total_nj = 0.0;
  std::vector<double> per_layer_nj;
  double wall_time_us = 0.0;
};

EnergyReport estimate_energy(const ActivityCounters& counters, const EnergyCoefficients& coeffs);

double wall_time_us(std::uint64_t cycles, double frequency_mhz);

}  // namespace dtsnn

#endif  // DTSNN_HWSIM_HPP_
