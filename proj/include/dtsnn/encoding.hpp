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

#ifndef DTSNN_ENCODING_HPP_
#define DTSNN_ENCODING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtsnn/datasets.hpp"
#include "dtsnn/random.hpp"
#include "dtsnn/spiking.hpp"

namespace dtsnn {

enum class Direction : std::uint8_t { up = 0, down = 1 };

constexpr Direction flipped(Direction d) {
  return d == Direction::up ? Direction::down : Direction::up;
}
const char* to_string(Direction d);

struct SequenceMeta {
  std::string source_id;
  Direction direction = Direction::down;
  int digit = -1;  // -1 when the sequence carries no digit label
};

// T spike frames of equal width plus provenance.
struct SpikeFrameSequence {
  std::vector<SpikeFrame> frames;
  SequenceMeta meta;

  std::size_t steps() const { return frames.size(); }
  std::size_t width() const { return frames.empty() ? 0 : frames.front().size(); }
};

// Rate coding: neuron i fires with probability pixel_i / 255. Each call is a
// fresh draw.
SpikeFrame bernoulli_encode(std::span<const std::uint8_t> pixels, Rng& rng,
                            std::size_t step = 0);

enum class PolarityFilter : std::uint8_t { on, off, both };

// Bin b covers [b * window / T, (b + 1) * window / T). Events at or past the
// window are dropped; neuron index is y * width + x; repeated events in one
// bin collapse to a single spike.
SpikeFrameSequence bin_events_to_frames(std::span<const EventRecord> events,
                                        std::size_t steps,
                                        std::uint32_t window_us,
                                        PolarityFilter filter,
                                        std::size_t width);

// Frames reversed and the direction tag flipped; the input is untouched.
SpikeFrameSequence reverse_time_augment(const SpikeFrameSequence& seq);

// Appends the reversed copy of every sequence: N in, 2N out.
std::vector<SpikeFrameSequence> augment_with_reversed(
    const std::vector<SpikeFrameSequence>& sequences);

struct MovingBarOptions {
  double on_prob = 0.9;
  double background_prob = 0.02;
  bool noise = true;  // false: bar pixels always fire, background never
};

// A horizontal one-pixel bar moving one row per step on a grid x grid field
// with wraparound, from a random start row. Labels are the direction.
std::vector<SpikeFrameSequence> synth_moving_bar(std::size_t n_samples,
                                                 std::size_t steps,
                                                 std::size_t grid,
                                                 Direction direction, Rng& rng,
                                                 const MovingBarOptions& opts = {});

// n_samples sequences, half of each direction, shuffled; reproducible from
// (seed, n_samples, steps, grid).
std::vector<SpikeFrameSequence> make_moving_bar_dataset(
    std::size_t n_samples, std::size_t steps, std::size_t grid,
    std::uint64_t seed, const MovingBarOptions& opts = {});

struct SaccadeOptions {
  std::size_t canvas = 34;
  std::uint32_t duration_us = 100000;
  std::uint32_t substep_us = 1000;
  double travel_px = 4.0;   // downward displacement over the sweep
  double contrast = 40.0;   // intensity change per emitted event
  double noise_rate = 0.0005;  // spurious events per pixel per substep
};

// Renders a downward sweep of an image as a DVS-style event stream: each
// pixel emits an on (off) event whenever its intensity rises (falls) by
// `contrast` from its last reference level. Stand-in for N-MNIST saccade 1
// when the real recordings are unavailable.
std::vector<EventRecord> render_saccade_events(const ImageSample& image, Rng& rng,
                                               const SaccadeOptions& opts = {});

}  // namespace dtsnn

#endif  // DTSNN_ENCODING_HPP_
