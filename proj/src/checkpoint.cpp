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

#include "dtsnn/checkpoint.hpp"

#include <cstring>

#include "binary_io.hpp"
#include "dtsnn/datasets.hpp"

namespace dtsnn {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'S', 'N', 'N', 'C', 'K', 'P'};

void put_shape(detail::ByteWriter& w, const Shape& shape) {
  w.put(static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) w.put(static_cast<std::uint32_t>(d));
}

Shape get_shape(detail::ByteReader& r) {
  const auto rank = r.get<std::uint32_t>();
  if (rank > 4) throw FormatError("checkpoint: tensor rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = r.get<std::uint32_t>();
  return shape;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Network& net, const CheckpointMeta& meta) {
  detail::ByteWriter w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint8_t>(net.model));
  w.put_string(net.preset_id);
  w.put(meta.epoch);
  w.put(meta.seed);
  w.put(meta.config_hash);
  put_shape(w, net.input_shape);
  w.put(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    w.put(static_cast<std::uint8_t>(l.kind));
    put_shape(w, l.weights.shape);
    put_shape(w, l.bias.shape);
  }
  for (const auto& l : net.layers) {
    w.put_raw(l.weights.data.data(), l.weights.size() * sizeof(float));
    w.put_raw(l.bias.data.data(), l.bias.size() * sizeof(float));
  }
  return w.bytes();
}

void save_checkpoint(const Network& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  write_file_bytes(path, serialize_checkpoint(net, meta));
}

LoadedCheckpoint parse_checkpoint(std::span<const std::uint8_t> bytes,
                                  const std::optional<std::string>& expected_preset) {
  detail::ByteReader r(bytes, "checkpoint");
  char magic[8];
  r.get_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError("not a dtsnn checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  LoadedCheckpoint out;
  const auto model = r.get<std::uint8_t>();
  if (model > 1) throw FormatError("checkpoint: unknown neuron model " + std::to_string(model));
  out.net.model = static_cast<NeuronModel>(model);
  out.net.preset_id = r.get_string();
  out.meta.epoch = r.get<std::uint32_t>();
  out.meta.seed = r.get<std::uint64_t>();
  out.meta.config_hash = r.get<std::uint64_t>();
  out.net.input_shape = get_shape(r);
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers == 0 || n_layers > 64) {
    throw FormatError("checkpoint: implausible layer count " + std::to_string(n_layers));
  }
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    LayerParams p;
    const auto kind = r.get<std::uint8_t>();
    if (kind > 2) throw FormatError("checkpoint: unknown layer kind " + std::to_string(kind));
    p.kind = static_cast<LayerKind>(kind);
    p.weights = Tensor(get_shape(r));
    p.bias = Tensor(get_shape(r));
    out.net.layers.push_back(std::move(p));
  }
  for (auto& l : out.net.layers) {
    r.get_raw(l.weights.data.data(), l.weights.size() * sizeof(float));
    r.get_raw(l.bias.data.data(), l.bias.size() * sizeof(float));
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes after payload");
  if (expected_preset) validate_against_preset(out.net, find_preset(*expected_preset));
  return out;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<std::string>& expected_preset) {
  const auto bytes = read_file_bytes(path);
  return parse_checkpoint(bytes, expected_preset);
}

}  // namespace dtsnn
