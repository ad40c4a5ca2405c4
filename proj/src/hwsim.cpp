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

#include "dtsnn/hwsim.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "dtsnn/errors.hpp"
#include "dtsnn/kvfile.hpp"

namespace dtsnn {

bool SchedulerState::has_next() const {
  for (std::size_t i = cursor; i < spike_vector.size(); ++i) {
    if (spike_vector[i]) return true;
  }
  return false;
}

std::optional<std::size_t> priority_encode_next(SchedulerState& state) {
  while (state.cursor < state.spike_vector.size()) {
    const std::size_t i = state.cursor++;
    if (state.spike_vector[i]) return i;
  }
  return std::nullopt;
}

std::string_view to_string(EnginePhase phase) {
  switch (phase) {
    case EnginePhase::idle: return "idle";
    case EnginePhase::latch: return "latch";
    case EnginePhase::integrating: return "integrating";
    case EnginePhase::bias_fire: return "bias_fire";
    case EnginePhase::handshake: return "handshake";
  }
  return "?";
}

void SimConfig::validate() const {
  if (latch_cycles < 1 || bias_fire_cycles < 1 || handshake_cycles < 1) {
    throw ValidationError("every pipeline phase needs at least one cycle");
  }
}

ActivityCounters ActivityCounters::for_layers(std::size_t layers, std::size_t steps) {
  ActivityCounters c;
  c.weight_row_fetches.assign(layers, 0);
  c.accumulate_ops.assign(layers, 0);
  c.fire_checks.assign(layers, 0);
  c.integrating_cycles.assign(layers, 0);
  c.stall_cycles.assign(layers, 0);
  c.active_spikes.assign(layers, std::vector<std::uint64_t>(steps, 0));
  return c;
}

LayerEngine::LayerEngine(std::size_t id, const QuantizedLayer& layer, NeuronModel model,
                         const SimConfig& cfg)
    : id_(id), layer_(&layer), model_(model), cfg_(cfg), v_(layer.rows(), 0) {}

void LayerEngine::latch(SpikeFrame frame) {
  if (phase_ != EnginePhase::idle) {
    throw SimulatorError("layer " + std::to_string(id_) + " latched while " +
                         std::string(to_string(phase_)));
  }
  if (frame.size() != layer_->cols()) {
    throw DimensionError("layer " + std::to_string(id_) + " expects " +
                         std::to_string(layer_->cols()) + " inputs, frame has " +
                         std::to_string(frame.size()));
  }
  step_ = frame.step;
  scheduler_ = SchedulerState(std::move(frame.bits));
  phase_ = EnginePhase::latch;
  phase_cycle_ = 0;
}

void LayerEngine::add_checked(std::size_t k, std::int64_t delta) {
  v_[k] += delta;
  if (v_[k] > kAccumulatorMax || v_[k] < kAccumulatorMin) {
    throw NumericError("24-bit accumulator overflow at layer " + std::to_string(id_) +
                       " neuron " + std::to_string(k));
  }
}

LayerEngine::CycleResult LayerEngine::cycle(ActivityCounters& counters) {
  CycleResult r;
  r.phase = phase_;
  const std::size_t rows = layer_->rows();
  switch (phase_) {
    case EnginePhase::idle:
      break;
    case EnginePhase::latch:
      if (++phase_cycle_ == cfg_.latch_cycles) {
        phase_cycle_ = 0;
        phase_ = scheduler_.has_next() ? EnginePhase::integrating : EnginePhase::bias_fire;
      }
      break;
    case EnginePhase::integrating: {
      const auto idx = priority_encode_next(scheduler_);
      if (!idx) throw SimulatorError("integrating with an exhausted scheduler");
      r.index = idx;
      for (std::size_t k = 0; k < rows; ++k) add_checked(k, layer_->weight(k, *idx));
      ++counters.weight_row_fetches[id_];
      counters.accumulate_ops[id_] += rows;
      ++counters.integrating_cycles[id_];
      if (!scheduler_.has_next()) phase_ = EnginePhase::bias_fire;
      break;
    }
    case EnginePhase::bias_fire:
      if (phase_cycle_ == 0) {
        for (std::size_t k = 0; k < rows; ++k) add_checked(k, layer_->bias()[k]);
      }
      if (++phase_cycle_ == cfg_.bias_fire_cycles) {
        fire_v_ = v_;
        pending_ = SpikeFrame(rows, step_);
        const std::int64_t theta = layer_->theta_q();
        for (std::size_t k = 0; k < rows; ++k) {
          const bool fire = v_[k] > theta;
          pending_.bits[k] = fire;
          if (model_ == NeuronModel::dc) {
            v_[k] = 0;
          } else if (fire) {
            v_[k] -= theta;
          }
        }
        counters.fire_checks[id_] += rows;
        phase_cycle_ = 0;
        phase_ = EnginePhase::handshake;
      }
      break;
    case EnginePhase::handshake:
      if (++phase_cycle_ == cfg_.handshake_cycles) {
        r.output = std::move(pending_);
        pending_ = SpikeFrame();
        ++steps_done_;
        phase_cycle_ = 0;
        phase_ = EnginePhase::idle;
      }
      break;
  }
  return r;
}

SimResult pipeline_simulate(const QuantizedModel& model, std::span<const SpikeFrame> inputs,
                            const SimConfig& cfg) {
  cfg.validate();
  const std::size_t L = model.layers.size();
  const std::size_t T = inputs.size();
  if (L == 0) throw ValidationError("model has no layers");
  for (const auto& f : inputs) {
    for (auto b : f.bits) {
      if (b > 1) throw ValidationError("input spike frames must be binary");
    }
  }

  std::vector<LayerEngine> engines;
  engines.reserve(L);
  for (std::size_t l = 0; l < L; ++l) engines.emplace_back(l, model.layers[l], model.model, cfg);

  SimResult result;
  result.counters = ActivityCounters::for_layers(L, T);
  result.layer_outputs.assign(T, std::vector<SpikeFrame>(L));
  result.readout_v.assign(T, {});

  std::vector<std::optional<SpikeFrame>> inbox(L);
  std::optional<SpikeFrame> sink;
  std::size_t next_input = 0;
  auto feed = [&] {
    SpikeFrame f = inputs[next_input];
    f.step = next_input++;
    inbox[0] = std::move(f);
  };
  if (T > 0) feed();

  std::deque<std::string> recent;
  auto note = [&](const std::string& line) {
    if (cfg.trace) *cfg.trace << line << '\n';
    recent.push_back(line);
    if (recent.size() > 16) recent.pop_front();
  };

  auto& counters = result.counters;
  std::uint64_t cycle = 0;
  auto finished = [&] {
    for (const auto& e : engines) {
      if (e.steps_done() < T) return false;
    }
    return true;
  };

  while (!finished()) {
    std::vector<bool> occupied(L);
    for (std::size_t l = 0; l < L; ++l) occupied[l] = inbox[l].has_value();
    const bool sink_full = sink.has_value();

    std::vector<bool> start(L, false);
    for (std::size_t l = 0; l < L; ++l) {
      const bool downstream_free = l + 1 < L ? !occupied[l + 1] : !sink_full;
      if (engines[l].phase() == EnginePhase::idle && engines[l].steps_done() < T &&
          occupied[l] && downstream_free) {
        start[l] = true;
      }
    }

    bool progress = false;
    std::vector<std::pair<std::size_t, SpikeFrame>> writes;
    for (std::size_t l = 0; l < L; ++l) {
      auto& e = engines[l];
      if (start[l]) {
        SpikeFrame f = std::move(*inbox[l]);
        inbox[l].reset();
        if (f.step != e.steps_done()) {
          throw SimulatorError("layer " + std::to_string(l) + " received step " +
                               std::to_string(f.step) + " out of order");
        }
        counters.active_spikes[l][f.step] = f.popcount();
        e.latch(std::move(f));
      }
      auto r = e.cycle(counters);
      std::ostringstream line;
      line << cycle << ' ' << l << ' ' << to_string(r.phase) << ' ';
      if (r.index) {
        line << *r.index;
      } else {
        line << '-';
      }
      note(line.str());
      if (r.phase == EnginePhase::idle) {
        if (e.steps_done() < T) ++counters.stall_cycles[l];
      } else {
        progress = true;
      }
      if (r.output) writes.emplace_back(l, std::move(*r.output));
    }

    if (!occupied[0] && next_input < T) {
      feed();
      progress = true;
    }

    for (auto& [l, frame] : writes) {
      const std::size_t t = frame.step;
      result.layer_outputs[t][l] = frame;
      if (l + 1 == L) {
        result.readout_v[t] = engines[l].last_fire_v();
        if (!cfg.drain_output) {
          if (sink) throw SimulatorError("output sink overwritten at cycle " + std::to_string(cycle));
          sink = std::move(frame);
        }
      } else {
        if (inbox[l + 1]) {
          throw SimulatorError("inbox of layer " + std::to_string(l + 1) +
                               " overwritten at cycle " + std::to_string(cycle));
        }
        inbox[l + 1] = std::move(frame);
      }
    }

    ++cycle;
    if (!progress) {
      std::string msg = "pipeline deadlock at cycle " + std::to_string(cycle - 1) + "; recent trace:";
      for (const auto& s : recent) msg += "\n  " + s;
      throw SimulatorError(msg);
    }
  }
  counters.total_cycles = cycle;
  return result;
}

SparsityReport report_sparsity(const ActivityCounters& counters,
                               std::span<const std::size_t> fan_in, std::size_t steps) {
  if (fan_in.size() != counters.layers()) {
    throw DimensionError("fan-in list has " + std::to_string(fan_in.size()) +
                         " layers, counters have " + std::to_string(counters.layers()));
  }
  SparsityReport rep;
  double fetched = 0.0;
  double capacity = 0.0;
  for (std::size_t l = 0; l < fan_in.size(); ++l) {
    const double cap = static_cast<double>(fan_in[l]) * static_cast<double>(steps);
    const double f = static_cast<double>(counters.weight_row_fetches[l]);
    rep.per_layer.push_back(cap > 0 ? f / cap : 0.0);
    fetched += f;
    capacity += cap;
  }
  rep.aggregate = capacity > 0 ? fetched / capacity : 0.0;
  return rep;
}

SparsityReport report_sparsity(const ActivityCounters& counters, const QuantizedModel& model,
                               std::size_t steps) {
  std::vector<std::size_t> fan_in;
  for (const auto& l : model.layers) fan_in.push_back(l.cols());
  return report_sparsity(counters, fan_in, steps);
}

void EnergyCoefficients::validate() const {
  const double vals[] = {row_fetch_nj, accumulate_nj, fire_check_nj, idle_cycle_nj};
  for (double v : vals) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("energy coefficients must be finite and >= 0");
    }
  }
  if (!(frequency_mhz > 0.0) || !std::isfinite(frequency_mhz)) {
    throw ValidationError("frequency_mhz must be positive");
  }
}

EnergyCoefficients load_energy_coefficients(const std::filesystem::path& path) {
  EnergyCoefficients c;
  for (const auto& kv : load_key_values(path)) {
    const double v = parse_double(kv.key, kv.value);
    if (kv.key == "row_fetch_nj") {
      c.row_fetch_nj = v;
    } else if (kv.key == "accumulate_nj") {
      c.accumulate_nj = v;
    } else if (kv.key == "fire_check_nj") {
      c.fire_check_nj = v;
    } else if (kv.key == "idle_cycle_nj") {
      c.idle_cycle_nj = v;
    } else if (kv.key == "frequency_mhz") {
      c.frequency_mhz = v;
    } else {
      throw ValidationError("unknown energy coefficient '" + kv.key + "'");
    }
  }
  c.validate();
  return c;
}

double wall_time_us(std::uint64_t cycles, double frequency_mhz) {
  return static_cast<double>(cycles) / frequency_mhz;
}

EnergyReport estimate_energy(const ActivityCounters& counters, const EnergyCoefficients& coeffs) {
  coeffs.validate();
  EnergyReport rep;
  for (std::size_t l = 0; l < counters.layers(); ++l) {
    const double e = coeffs.row_fetch_nj * static_cast<double>(counters.weight_row_fetches[l]) +
                     coeffs.accumulate_nj * static_cast<double>(counters.accumulate_ops[l]) +
                     coeffs.fire_check_nj * static_cast<double>(counters.fire_checks[l]) +
                     coeffs.idle_cycle_nj * static_cast<double>(counters.stall_cycles[l]);
    rep.per_layer_nj.push_back(e);
    rep.total_nj += e;
  }
  rep.wall_time_us = wall_time_us(counters.total_cycles, coeffs.frequency_mhz);
  return rep;
}

}  // namespace dtsnn
