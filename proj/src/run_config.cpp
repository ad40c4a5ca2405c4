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

#include "dtsnn/run_config.hpp"

#include <charconv>
#include <functional>
#include <string_view>

#include "dtsnn/datasets.hpp"
#include "dtsnn/errors.hpp"
#include "dtsnn/hwsim.hpp"

namespace dtsnn {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  const long long v = parse_int(key, value);
  if (v < 0) throw ValidationError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"run_id", [](RunConfig& c, std::string_view v) { c.run_id = v; },
       [](const RunConfig& c) { return c.run_id; }},
      {"preset",
       [](RunConfig& c, std::string_view v) {
         find_preset(std::string(v));
         c.train.preset = v;
         c.preset_explicit = true;
       },
       [](const RunConfig& c) { return c.train.preset; }},
      {"dataset",
       [](RunConfig& c, std::string_view v) {
         if (v != "mnist" && v != "events" && v != "bar" && v != "saccade") {
           throw ValidationError("dataset must be mnist, events, bar or saccade, got '" +
                                 std::string(v) + "'");
         }
         c.dataset = v;
       },
       [](const RunConfig& c) { return c.dataset; }},
      {"data_dir", [](RunConfig& c, std::string_view v) { c.data_dir = std::string(v); },
       [](const RunConfig& c) { return c.data_dir.string(); }},
      {"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
       [](const RunConfig& c) { return c.out_dir.string(); }},
      {"checkpoint", [](RunConfig& c, std::string_view v) { c.checkpoint = std::string(v); },
       [](const RunConfig& c) { return c.checkpoint.string(); }},
      {"model", [](RunConfig& c, std::string_view v) { c.model = std::string(v); },
       [](const RunConfig& c) { return c.model.string(); }},
      {"coeffs", [](RunConfig& c, std::string_view v) { c.coeffs = std::string(v); },
       [](const RunConfig& c) { return c.coeffs.string(); }},
      {"n_train", [](RunConfig& c, std::string_view v) { c.n_train = parse_size("n_train", v); },
       [](const RunConfig& c) { return std::to_string(c.n_train); }},
      {"n_test", [](RunConfig& c, std::string_view v) { c.n_test = parse_size("n_test", v); },
       [](const RunConfig& c) { return std::to_string(c.n_test); }},
      {"n_val", [](RunConfig& c, std::string_view v) { c.n_val = parse_size("n_val", v); },
       [](const RunConfig& c) { return std::to_string(c.n_val); }},
      {"window_us",
       [](RunConfig& c, std::string_view v) {
         c.window_us = static_cast<std::uint32_t>(parse_size("window_us", v));
       },
       [](const RunConfig& c) { return std::to_string(c.window_us); }},
      {"grid", [](RunConfig& c, std::string_view v) { c.grid = parse_size("grid", v); },
       [](const RunConfig& c) { return std::to_string(c.grid); }},
      {"epochs", [](RunConfig& c, std::string_view v) { c.train.epochs = parse_size("epochs", v); },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"batch_size",
       [](RunConfig& c, std::string_view v) { c.train.batch_size = parse_size("batch_size", v); },
       [](const RunConfig& c) { return std::to_string(c.train.batch_size); }},
      {"lr_start",
       [](RunConfig& c, std::string_view v) { c.train.lr_start = parse_double("lr_start", v); },
       [](const RunConfig& c) { return fmt(c.train.lr_start); }},
      {"lr_end", [](RunConfig& c, std::string_view v) { c.train.lr_end = parse_double("lr_end", v); },
       [](const RunConfig& c) { return fmt(c.train.lr_end); }},
      {"theta", [](RunConfig& c, std::string_view v) { c.train.theta = parse_double("theta", v); },
       [](const RunConfig& c) { return fmt(c.train.theta); }},
      {"dropout_input",
       [](RunConfig& c, std::string_view v) {
         c.train.dropout_input = parse_double("dropout_input", v);
       },
       [](const RunConfig& c) { return fmt(c.train.dropout_input); }},
      {"dropout_hidden",
       [](RunConfig& c, std::string_view v) {
         c.train.dropout_hidden = parse_double("dropout_hidden", v);
       },
       [](const RunConfig& c) { return fmt(c.train.dropout_hidden); }},
      {"t_train", [](RunConfig& c, std::string_view v) { c.train.t_train = parse_size("t_train", v); },
       [](const RunConfig& c) { return std::to_string(c.train.t_train); }},
      {"loss_target",
       [](RunConfig& c, std::string_view v) {
         if (v == "output_potentials") {
           c.train.loss_target = LossTarget::output_potentials;
         } else if (v == "spike_counts") {
           c.train.loss_target = LossTarget::spike_counts;
         } else {
           throw ValidationError("loss_target must be output_potentials or spike_counts");
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.train.loss_target)); }},
      {"reset_grad",
       [](RunConfig& c, std::string_view v) {
         if (v == "ste") {
           c.train.reset_grad = ResetGrad::ste;
         } else if (v == "detached") {
           c.train.reset_grad = ResetGrad::detached;
         } else {
           throw ValidationError("reset_grad must be ste or detached");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.train.reset_grad == ResetGrad::ste ? "ste" : "detached");
       }},
      {"seed",
       [](RunConfig& c, std::string_view v) {
         c.train.seed = static_cast<std::uint64_t>(parse_size("seed", v));
       },
       [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      {"steps", [](RunConfig& c, std::string_view v) { c.steps = parse_size("steps", v); },
       [](const RunConfig& c) { return std::to_string(c.steps); }},
      {"trials", [](RunConfig& c, std::string_view v) { c.trials = parse_size("trials", v); },
       [](const RunConfig& c) { return std::to_string(c.trials); }},
      {"readout",
       [](RunConfig& c, std::string_view v) {
         if (v == "potential_sum") {
           c.readout = DcReadout::potential_sum;
         } else if (v == "spike_count") {
           c.readout = DcReadout::spike_count;
         } else {
           throw ValidationError("readout must be potential_sum or spike_count");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.readout == DcReadout::potential_sum ? "potential_sum"
                                                                  : "spike_count");
       }},
      {"bits", [](RunConfig& c, std::string_view v) { c.bits = static_cast<int>(parse_int("bits", v)); },
       [](const RunConfig& c) { return std::to_string(c.bits); }},
      {"sweep", [](RunConfig& c, std::string_view v) { c.sweep = parse_bool("sweep", v); },
       [](const RunConfig& c) { return std::string(c.sweep ? "true" : "false"); }},
      {"trace", [](RunConfig& c, std::string_view v) { c.trace = parse_bool("trace", v); },
       [](const RunConfig& c) { return std::string(c.trace ? "true" : "false"); }},
      {"samples", [](RunConfig& c, std::string_view v) { c.samples = parse_size("samples", v); },
       [](const RunConfig& c) { return std::to_string(c.samples); }},
      {"latch_cycles",
       [](RunConfig& c, std::string_view v) { c.latch_cycles = static_cast<int>(parse_int("latch_cycles", v)); },
       [](const RunConfig& c) { return std::to_string(c.latch_cycles); }},
      {"bias_fire_cycles",
       [](RunConfig& c, std::string_view v) {
         c.bias_fire_cycles = static_cast<int>(parse_int("bias_fire_cycles", v));
       },
       [](const RunConfig& c) { return std::to_string(c.bias_fire_cycles); }},
      {"handshake_cycles",
       [](RunConfig& c, std::string_view v) {
         c.handshake_cycles = static_cast<int>(parse_int("handshake_cycles", v));
       },
       [](const RunConfig& c) { return std::to_string(c.handshake_cycles); }},
      {"record_time",
       [](RunConfig& c, std::string_view v) { c.record_time = parse_bool("record_time", v); },
       [](const RunConfig& c) { return std::string(c.record_time ? "true" : "false"); }},
  };
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

fs::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? out_dir / "model.ckpt" : checkpoint;
}

fs::path RunConfig::model_path() const { return model.empty() ? out_dir / "model.q" : model; }

std::string RunConfig::resolved_run_id() const {
  if (!run_id.empty()) return run_id;
  return subcommand + "-" + train.preset + "-s" + std::to_string(train.seed);
}

std::string RunConfig::to_text() const {
  std::string out = "# dtsnn " + subcommand + "\n";
  for (const auto& f : fields()) {
    out += std::string(f.key) + " = " + f.get(*this) + "\n";
  }
  return out;
}

RunConfig resolve_config(std::string subcommand, const std::vector<KeyValue>& file_values,
                         const ConfigOverrides& overrides) {
  // Validate every key before applying anything so the error names the
  // first unknown key regardless of order.
  for (const auto& kv : file_values) field(kv.key);
  for (const auto& [k, v] : overrides) field(k);

  std::string preset = "mlp-128";
  bool explicit_preset = false;
  for (const auto& kv : file_values) {
    if (kv.key == "preset") preset = kv.value, explicit_preset = true;
  }
  for (const auto& [k, v] : overrides) {
    if (k == "preset") preset = v, explicit_preset = true;
  }

  RunConfig cfg;
  cfg.subcommand = std::move(subcommand);
  const auto& p = find_preset(preset);
  cfg.train = TrainConfig::from_preset(p);
  cfg.preset_explicit = explicit_preset;
  cfg.steps = p.model == NeuronModel::ct ? p.t_train : 8;
  if (p.id == "bar-mlp") {
    cfg.dataset = "bar";
    cfg.n_train = 2000;
    cfg.n_test = 500;
  } else if (p.model == NeuronModel::ct) {
    cfg.dataset = "saccade";
  }

  for (const auto& kv : file_values) {
    if (kv.key != "preset") field(kv.key).set(cfg, kv.value);
  }
  for (const auto& [k, v] : overrides) {
    if (k != "preset") field(k).set(cfg, v);
  }
  cfg.train.validate();
  if (cfg.bits < 2 || cfg.bits > 8) throw ValidationError("bits must be in [2, 8]");
  if (cfg.trials == 0) throw ValidationError("trials must be >= 1");
  SimConfig{cfg.latch_cycles, cfg.bias_fire_cycles, cfg.handshake_cycles}.validate();
  return cfg;
}

RunConfig load_config(std::string subcommand, const std::optional<fs::path>& path,
                      const ConfigOverrides& overrides) {
  std::vector<KeyValue> values;
  if (path) values = load_key_values(*path);
  return resolve_config(std::move(subcommand), values, overrides);
}

fs::path echo_config(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
  const auto path = cfg.out_dir / ("config_" + cfg.subcommand + ".txt");
  const std::string text = cfg.to_text();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return path;
}

}  // namespace dtsnn
