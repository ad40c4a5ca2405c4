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

#ifndef DTSNN_CHECKPOINT_HPP_
#define DTSNN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtsnn/network.hpp"

namespace dtsnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint32_t epoch = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Layout (little-endian):
//   "DTSNNCKP" | u32 version | u8 neuron model | str preset id |
//   u32 epoch | u64 seed | u64 config hash |
//   u32 input rank, u32 dims... | u32 layer count |
//   per layer: u8 kind, u32 weight rank, dims..., u32 bias rank, dims... |
//   per layer: f32 weights, f32 bias
// where str is u32 length + bytes.
std::vector<std::uint8_t> serialize_checkpoint(const Network& net, const CheckpointMeta& meta);
void save_checkpoint(const Network& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

// With `expected_preset` set, the stored preset id and every layer shape
// must match it (ValidationError otherwise).
LoadedCheckpoint parse_checkpoint(std::span<const std::uint8_t> bytes,
                                  const std::optional<std::string>& expected_preset = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<std::string>& expected_preset = {});

}  // namespace dtsnn

#endif  // DTSNN_CHECKPOINT_HPP_
