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

#include "dtsnn/datasets.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace dtsnn {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

namespace {

bool is_gzip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes,
                                 const std::string& name) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    throw FormatError("zlib init failed for " + name);
  }
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("corrupt gzip stream in " + name);
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw TruncatedError("truncated gzip stream in " + name);
    }
  }
  inflateEnd(&zs);
  return out;
}

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw TruncatedError("IDX file shorter than its magic");
  const std::uint32_t magic = read_be32(bytes, 0);
  const std::uint32_t ndims = magic & 0xff;
  if ((magic & 0xffffff00u) != 0x00000800u || ndims == 0 || ndims > 4) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", magic);
    throw FormatError(std::string("bad IDX magic ") + buf +
                      " (expected unsigned-byte data, 0x00000801..0x00000804)");
  }
  if (bytes.size() < 4 + 4 * ndims) throw TruncatedError("IDX header truncated");
  IdxArray array;
  std::size_t count = 1;
  for (std::uint32_t d = 0; d < ndims; ++d) {
    array.dims.push_back(read_be32(bytes, 4 + 4 * d));
    count *= array.dims.back();
  }
  const std::size_t offset = 4 + 4 * ndims;
  if (bytes.size() - offset < count) {
    throw TruncatedError("IDX header declares " + std::to_string(count) +
                         " bytes of data, file holds " +
                         std::to_string(bytes.size() - offset));
  }
  array.data.assign(bytes.begin() + offset, bytes.begin() + offset + count);
  return array;
}

IdxArray load_idx(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  if (is_gzip(bytes)) bytes = gunzip(bytes, path.string());
  return parse_idx(bytes);
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& array) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * array.dims.size() + array.data.size());
  write_be32(out, 0x00000800u | static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) write_be32(out, d);
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

void save_idx(const IdxArray& array, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_idx(array));
}

std::vector<ImageSample> images_from_idx(const IdxArray& images,
                                         const IdxArray& labels) {
  if (images.dims.size() != 3) {
    throw FormatError("image IDX must have 3 dims, got " +
                      std::to_string(images.dims.size()));
  }
  if (labels.dims.size() != 1) {
    throw FormatError("label IDX must have 1 dim, got " +
                      std::to_string(labels.dims.size()));
  }
  if (images.dims[0] != labels.dims[0]) {
    throw ValidationError(std::to_string(images.dims[0]) + " images but " +
                          std::to_string(labels.dims[0]) + " labels");
  }
  const std::size_t rows = images.dims[1], cols = images.dims[2];
  std::vector<ImageSample> samples(images.dims[0]);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    auto& s = samples[n];
    s.rows = rows;
    s.cols = cols;
    const auto first = images.data.begin() + static_cast<std::ptrdiff_t>(n * rows * cols);
    s.pixels.assign(first, first + static_cast<std::ptrdiff_t>(rows * cols));
    s.label = labels.data[n];
  }
  return samples;
}

std::vector<ImageSample> load_mnist(const std::filesystem::path& images,
                                    const std::filesystem::path& labels) {
  return images_from_idx(load_idx(images), load_idx(labels));
}

std::vector<EventRecord> parse_aer_events(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 5 != 0) {
    throw FormatError("AER stream length " + std::to_string(bytes.size()) +
                      " is not a multiple of 5");
  }
  std::vector<EventRecord> events(bytes.size() / 5);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto* r = bytes.data() + 5 * i;
    auto& e = events[i];
    e.x = r[0];
    e.y = r[1];
    e.polarity = (r[2] & 0x80) ? Polarity::on : Polarity::off;
    e.timestamp_us = (std::uint32_t{r[2] & 0x7fu} << 16) |
                     (std::uint32_t{r[3]} << 8) | std::uint32_t{r[4]};
    if (i > 0 && e.timestamp_us < events[i - 1].timestamp_us) {
      throw FormatError("AER timestamps decrease at event " + std::to_string(i));
    }
  }
  return events;
}

std::vector<EventRecord> load_aer_events(const std::filesystem::path& path) {
  return parse_aer_events(read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_aer_events(std::span<const EventRecord> events) {
  std::vector<std::uint8_t> out;
  out.reserve(events.size() * 5);
  for (const auto& e : events) {
    if (e.timestamp_us > kAerMaxTimestamp) {
      throw ValidationError("timestamp " + std::to_string(e.timestamp_us) +
                            " does not fit in 23 bits");
    }
    out.push_back(e.x);
    out.push_back(e.y);
    out.push_back(static_cast<std::uint8_t>(
        (e.polarity == Polarity::on ? 0x80 : 0x00) | (e.timestamp_us >> 16)));
    out.push_back(static_cast<std::uint8_t>(e.timestamp_us >> 8));
    out.push_back(static_cast<std::uint8_t>(e.timestamp_us));
  }
  return out;
}

void save_aer_events(std::span<const EventRecord> events,
                     const std::filesystem::path& path) {
  write_file_bytes(path, serialize_aer_events(events));
}

std::vector<EventSample> load_event_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("event dataset not found: " + root.string());
  std::vector<EventSample> samples;
  for (int digit = 0; digit <= 9; ++digit) {
    const fs::path dir = root / std::to_string(digit);
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      samples.push_back({load_aer_events(f), digit,
                         std::to_string(digit) + "/" + f.stem().string()});
    }
  }
  if (samples.empty()) throw IoError("no <digit>/*.bin recordings under " + root.string());
  return samples;
}

}  // namespace dtsnn
