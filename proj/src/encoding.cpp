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

#include "dtsnn/encoding.hpp"

#include <algorithm>
#include <cmath>

namespace dtsnn {

const char* to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

SpikeFrame bernoulli_encode(std::span<const std::uint8_t> pixels, Rng& rng,
                            std::size_t step) {
  SpikeFrame frame(pixels.size(), step);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    frame.bits[i] = bernoulli(rng, pixels[i] / 255.0) ? 1 : 0;
  }
  return frame;
}

SpikeFrameSequence bin_events_to_frames(std::span<const EventRecord> events,
                                        std::size_t steps,
                                        std::uint32_t window_us,
                                        PolarityFilter filter,
                                        std::size_t width) {
  if (steps == 0) throw ValidationError("event binning needs at least one step");
  if (window_us == 0) throw ValidationError("event binning window must be positive");
  SpikeFrameSequence seq;
  seq.frames.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) seq.frames.emplace_back(width * width, t);
  for (const auto& e : events) {
    if (e.timestamp_us >= window_us) continue;
    if (filter == PolarityFilter::on && e.polarity != Polarity::on) continue;
    if (filter == PolarityFilter::off && e.polarity != Polarity::off) continue;
    if (e.x >= width || e.y >= width) {
      throw ValidationError("event at (" + std::to_string(e.x) + ", " +
                            std::to_string(e.y) + ") outside a " +
                            std::to_string(width) + "-pixel field");
    }
    // floor(t * T / window) is exactly the half-open bin index.
    const auto bin = static_cast<std::size_t>(
        std::uint64_t{e.timestamp_us} * steps / window_us);
    seq.frames[bin].bits[std::size_t{e.y} * width + e.x] = 1;
  }
  return seq;
}

SpikeFrameSequence reverse_time_augment(const SpikeFrameSequence& seq) {
  SpikeFrameSequence out;
  out.meta = seq.meta;
  out.meta.direction = flipped(seq.meta.direction);
  out.frames.assign(seq.frames.rbegin(), seq.frames.rend());
  for (std::size_t t = 0; t < out.frames.size(); ++t) out.frames[t].step = t;
  return out;
}

std::vector<SpikeFrameSequence> augment_with_reversed(
    const std::vector<SpikeFrameSequence>& sequences) {
  std::vector<SpikeFrameSequence> out = sequences;
  out.reserve(2 * sequences.size());
  for (const auto& s : sequences) out.push_back(reverse_time_augment(s));
  return out;
}

std::vector<SpikeFrameSequence> synth_moving_bar(std::size_t n_samples,
                                                 std::size_t steps,
                                                 std::size_t grid,
                                                 Direction direction, Rng& rng,
                                                 const MovingBarOptions& opts) {
  if (steps > grid) {
    throw ValidationError("moving bar needs steps <= grid, got " +
                          std::to_string(steps) + " > " + std::to_string(grid));
  }
  if (grid == 0) throw ValidationError("moving bar grid must be positive");
  std::vector<SpikeFrameSequence> out;
  out.reserve(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    SpikeFrameSequence seq;
    seq.meta.direction = direction;
    const std::size_t start = uniform_index(rng, grid);
    seq.meta.source_id = std::string("bar-") + to_string(direction) + "-" +
                         std::to_string(start);
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t row = direction == Direction::down
                                  ? (start + t) % grid
                                  : (start + grid - t % grid) % grid;
      SpikeFrame f(grid * grid, t);
      for (std::size_t y = 0; y < grid; ++y) {
        const bool on_bar = y == row;
        for (std::size_t x = 0; x < grid; ++x) {
          bool fire = on_bar;
          if (opts.noise) fire = bernoulli(rng, on_bar ? opts.on_prob : opts.background_prob);
          f.bits[y * grid + x] = fire ? 1 : 0;
        }
      }
      seq.frames.push_back(std::move(f));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<SpikeFrameSequence> make_moving_bar_dataset(std::size_t n_samples,
                                                        std::size_t steps,
                                                        std::size_t grid,
                                                        std::uint64_t seed,
                                                        const MovingBarOptions& opts) {
  Rng rng(derive_seed(seed, n_samples, steps * 1000003 + grid));
  auto data = synth_moving_bar(n_samples - n_samples / 2, steps, grid, Direction::down, rng, opts);
  auto up = synth_moving_bar(n_samples / 2, steps, grid, Direction::up, rng, opts);
  data.insert(data.end(), std::make_move_iterator(up.begin()),
              std::make_move_iterator(up.end()));
  shuffle(std::span(data), rng);
  return data;
}

std::vector<EventRecord> render_saccade_events(const ImageSample& image, Rng& rng,
                                               const SaccadeOptions& opts) {
  const std::size_t n = opts.canvas;
  if (image.rows > n || image.cols > n) {
    throw DimensionError("image larger than the event canvas");
  }
  const double off_y = (static_cast<double>(n - image.rows) - opts.travel_px) / 2.0;
  const double off_x = static_cast<double>(n - image.cols) / 2.0;
  auto pixel = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= static_cast<long>(image.rows) ||
        c >= static_cast<long>(image.cols)) {
      return 0.0;
    }
    return image.pixels[static_cast<std::size_t>(r) * image.cols + static_cast<std::size_t>(c)];
  };
  // Intensity seen by sensor pixel (y, x) when the image has moved `shift`
  // rows down; linear interpolation between image rows.
  auto intensity = [&](std::size_t y, std::size_t x, double shift) {
    const double src_y = static_cast<double>(y) - off_y - shift;
    const double src_x = static_cast<double>(x) - off_x;
    const long r0 = static_cast<long>(std::floor(src_y));
    const double fy = src_y - static_cast<double>(r0);
    const long c = static_cast<long>(std::lround(src_x));
    return (1.0 - fy) * pixel(r0, c) + fy * pixel(r0 + 1, c);
  };
  std::vector<double> reference(n * n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) reference[y * n + x] = intensity(y, x, 0.0);
  }
  std::vector<EventRecord> events;
  const std::uint32_t substeps = opts.duration_us / opts.substep_us;
  for (std::uint32_t s = 1; s <= substeps; ++s) {
    const double shift = opts.travel_px * s / substeps;
    const std::uint32_t t0 = (s - 1) * opts.substep_us;
    std::vector<EventRecord> batch;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        double& ref = reference[y * n + x];
        const double now = intensity(y, x, shift);
        while (now - ref >= opts.contrast) {
          ref += opts.contrast;
          batch.push_back({static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y),
                           Polarity::on, 0});
        }
        while (ref - now >= opts.contrast) {
          ref -= opts.contrast;
          batch.push_back({static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y),
                           Polarity::off, 0});
        }
        if (bernoulli(rng, opts.noise_rate)) {
          batch.push_back({static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y),
                           bernoulli(rng, 0.5) ? Polarity::on : Polarity::off, 0});
        }
      }
    }
    for (auto& e : batch) {
      e.timestamp_us = t0 + static_cast<std::uint32_t>(uniform_index(rng, opts.substep_us));
    }
    std::stable_sort(batch.begin(), batch.end(), [](const EventRecord& a, const EventRecord& b) {
      return a.timestamp_us < b.timestamp_us;
    });
    events.insert(events.end(), batch.begin(), batch.end());
  }
  return events;
}

}  // namespace dtsnn
