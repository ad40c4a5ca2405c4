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

#ifndef DTSNN_TRAINING_HPP_
#define DTSNN_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dtsnn/datasets.hpp"
#include "dtsnn/encoding.hpp"
#include "dtsnn/network.hpp"

namespace dtsnn {

struct TrainConfig {
  std::string preset = "mlp-128";
  std::size_t epochs = 20;
  std::size_t batch_size = 100;
  double lr_start = 1e-3;
  double lr_end = 1e-5;
  double theta = 1.0;
  double dropout_input = 0.0;
  double dropout_hidden = 0.0;
  std::size_t t_train = 1;
  LossTarget loss_target = LossTarget::output_potentials;
  ResetGrad reset_grad = ResetGrad::ste;
  std::uint64_t seed = 1;

  static TrainConfig from_preset(const ModelPreset& preset);
  void validate() const;
  SteConfig ste() const { return {theta, reset_grad}; }
};

// Exponential decay from lr_start at epoch 0 to lr_end at the last epoch.
struct LrSchedule {
  double lr_start = 1e-3;
  double lr_end = 1e-7;
  std::size_t total_epochs = 1;
};

// lr_start * (lr_end / lr_start)^(epoch / (total_epochs - 1)). Fractional
// epochs are allowed; with fewer than two epochs the start rate is returned.
double lr_exponential_decay(double epoch, const LrSchedule& schedule);

// +-1 targets: ten digit outputs and two motion outputs (up, down).
struct DualTaskTargets {
  std::vector<float> digit;
  std::vector<float> motion;

  static DualTaskTargets from(int digit, Direction direction);
};

// Builds the target row for an output layer of width 2 (motion), 10 (digit)
// or 12 (digit then motion).
Tensor make_targets(int digit, Direction direction, std::size_t outputs);
Tensor class_targets(int label, std::size_t outputs);

// A network plus its optimizer state and epoch counter.
struct TrainingState {
  Network net;
  std::vector<AdamState> weight_adam;
  std::vector<AdamState> bias_adam;
  std::size_t epoch = 0;

  explicit TrainingState(Network network);
};

struct EpochResult {
  double loss = 0.0;            // mean per-sample loss over the epoch
  double train_accuracy = 0.0;  // from the training forward passes
  double lr = 0.0;
};

// One pass over `data` with the SNN-DC model (one time step per sample):
// fresh Bernoulli encoding and dropout per batch, squared hinge on the
// readout potentials, straight-through backward, Adam at the scheduled rate.
EpochResult train_epoch_dc(TrainingState& state, std::span<const ImageSample> data,
                           const TrainConfig& cfg, Rng& rng);

// One pass with the SNN-CT model: T-step unroll, spike counts rescaled to
// [-1, 1] margins, BPTT, Adam.
EpochResult train_epoch_ct(TrainingState& state,
                           std::span<const SpikeFrameSequence> data,
                           const TrainConfig& cfg, Rng& rng);

// Spike counts in [0, T] mapped affinely onto [-1, 1].
template <class Real>
BasicTensor<Real> counts_to_margins(const BasicTensor<Real>& counts, std::size_t steps);

// Loss and d loss / d counts for a batch of count rows (N x C).
LossResult<float> spike_count_loss(const Tensor& counts, const Tensor& targets,
                                   std::size_t steps);

enum class DcReadout : std::uint8_t { potential_sum, spike_count };

struct DcEvalOptions {
  std::size_t steps = 1;
  std::size_t trials = 20;
  DcReadout readout = DcReadout::potential_sum;
  double theta = 1.0;
  std::uint64_t seed = 1;
};

struct AccuracyCurve {
  std::vector<double> mean;                   // [t - 1], t = 1..steps
  std::vector<std::vector<double>> per_trial;  // [trial][t - 1]
};

// Accuracy after t = 1..steps time steps, averaged over trials. Each sample
// draws its spikes from a stream keyed by (seed, trial, sample content), so
// results do not depend on sample order.
AccuracyCurve evaluate_dc(const Network& net, std::span<const ImageSample> images,
                          const DcEvalOptions& opts);

struct CtEvalResult {
  std::vector<double> digit_accuracy;   // [t], t = 0..steps; empty without digit outputs
  std::vector<double> motion_accuracy;  // [t]; empty without motion outputs
};

// Classifies from cumulative output spike counts after t steps; ties go to
// the lowest index, so t = 0 predicts class 0.
CtEvalResult evaluate_ct(const Network& net, std::span<const SpikeFrameSequence> data,
                         std::size_t steps, double theta = 1.0);

// Per-sample cumulative spike counts [t][output], t = 0..steps.
std::vector<std::vector<float>> cumulative_counts(const Network& net,
                                                  const SpikeFrameSequence& seq,
                                                  std::size_t steps, double theta = 1.0);

// Single-step DC prediction from a given input frame (readout argmax).
std::size_t predict_dc(const Network& net, const SpikeFrame& frame, double theta = 1.0);

std::uint64_t sample_key(const ImageSample& sample);

// Frames for one image: step t of trial `trial` under `seed`.
std::vector<SpikeFrame> encode_image(const ImageSample& sample, std::size_t steps,
                                     std::uint64_t seed, std::uint64_t trial);

}  // namespace dtsnn

#endif  // DTSNN_TRAINING_HPP_
