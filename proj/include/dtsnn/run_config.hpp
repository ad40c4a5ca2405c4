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

#ifndef DTSNN_RUN_CONFIG_HPP_
#define DTSNN_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtsnn/kvfile.hpp"
#include "dtsnn/training.hpp"

namespace dtsnn {

// Everything a CLI run needs. Defaults come from the preset; a config file
// overrides them and command-line values override the file.
struct RunConfig {
  std::string subcommand;
  std::string run_id;
  bool preset_explicit = false;

  std::string dataset = "mnist";  // mnist, events, bar, saccade
  std::filesystem::path data_dir;
  std::filesystem::path out_dir = "run";
  std::filesystem::path checkpoint;  // defaults to out_dir/model.ckpt
  std::filesystem::path model;       // quantized model, defaults to out_dir/model.q
  std::filesystem::path coeffs;
  std::size_t n_train = 5000;
  std::size_t n_test = 1000;
  std::size_t n_val = 0;  // taken between train and test; enables best-epoch reporting
  std::uint32_t window_us = 100000;
  std::size_t grid = 16;

  TrainConfig train;

  std::size_t steps = 8;
  std::size_t trials = 20;
  DcReadout readout = DcReadout::potential_sum;
  int bits = 7;
  bool sweep = false;
  bool trace = false;
  std::size_t samples = 10;
  int latch_cycles = 1;
  int bias_fire_cycles = 2;
  int handshake_cycles = 1;
  bool record_time = false;

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path model_path() const;
  std::string resolved_run_id() const;

  // key = value lines in a fixed order; load_config of this text with no
  // overrides reproduces the config.
  std::string to_text() const;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Applies preset defaults, then the file (if any), then the overrides.
// Unknown keys raise ValidationError naming the key.
RunConfig resolve_config(std::string subcommand, const std::vector<KeyValue>& file_values,
                         const ConfigOverrides& overrides);
RunConfig load_config(std::string subcommand, const std::optional<std::filesystem::path>& path,
                      const ConfigOverrides& overrides);

// Writes to_text() as out_dir/config_<subcommand>.txt, creating out_dir.
std::filesystem::path echo_config(const RunConfig& cfg);

}  // namespace dtsnn

#endif  // DTSNN_RUN_CONFIG_HPP_
