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

#ifndef DTSNN_DATASETS_HPP_
#define DTSNN_DATASETS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtsnn/errors.hpp"

namespace dtsnn {

// Grayscale image with its class label.
struct ImageSample {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 0..255
  int label = -1;
};

// An unsigned-byte IDX container (MNIST distribution format).
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Big-endian header: magic 0x000008NN (NN = number of dims) followed by one
// uint32 per dim, then the payload. Gzip-compressed files are inflated
// transparently.
IdxArray load_idx(const std::filesystem::path& path);
IdxArray parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx(const IdxArray& array);
void save_idx(const IdxArray& array, const std::filesystem::path& path);

// Pairs an image file (N x rows x cols) with a label file (N).
std::vector<ImageSample> load_mnist(const std::filesystem::path& images,
                                    const std::filesystem::path& labels);
std::vector<ImageSample> images_from_idx(const IdxArray& images,
                                         const IdxArray& labels);

enum class Polarity : std::uint8_t { off = 0, on = 1 };

struct EventRecord {
  std::uint8_t x = 0;
  std::uint8_t y = 0;
  Polarity polarity = Polarity::off;
  std::uint32_t timestamp_us = 0;  // 23 bits on disk

  bool operator==(const EventRecord&) const = default;
};

inline constexpr std::uint32_t kAerMaxTimestamp = (1u << 23) - 1;

// 5-byte records: x, y, then polarity in bit 7 of byte 2 followed by a
// 23-bit big-endian timestamp in microseconds.
std::vector<EventRecord> load_aer_events(const std::filesystem::path& path);
std::vector<EventRecord> parse_aer_events(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_aer_events(std::span<const EventRecord> events);
void save_aer_events(std::span<const EventRecord> events,
                     const std::filesystem::path& path);

// Event stream of one recording with its digit label.
struct EventSample {
  std::vector<EventRecord> events;
  int label = -1;
  std::string id;
};

// Reads a directory tree laid out as <root>/<digit>/<name>.bin, sorted by
// (digit, name).
std::vector<EventSample> load_event_dataset(const std::filesystem::path& root);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

template <class Sample>
struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

// Consecutive, disjoint ranges: [0, n_train), [n_train, n_train + n_val), ...
template <class Sample>
DatasetSplit<Sample> split_dataset(const std::vector<Sample>& samples,
                                   std::size_t n_train, std::size_t n_val,
                                   std::size_t n_test) {
  if (n_train + n_val + n_test > samples.size()) {
    throw ValidationError("split needs " + std::to_string(n_train + n_val + n_test) +
                          " samples, dataset has " + std::to_string(samples.size()));
  }
  auto begin = samples.begin();
  DatasetSplit<Sample> split;
  split.train.assign(begin, begin + n_train);
  split.validation.assign(begin + n_train, begin + n_train + n_val);
  split.test.assign(begin + n_train + n_val, begin + n_train + n_val + n_test);
  return split;
}

}  // namespace dtsnn

#endif  // DTSNN_DATASETS_HPP_
