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

#include "dtsnn/training.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace dtsnn {

TrainConfig TrainConfig::from_preset(const ModelPreset& preset) {
  TrainConfig cfg;
  cfg.preset = preset.id;
  cfg.epochs = preset.epochs;
  cfg.lr_start = preset.lr_start;
  cfg.lr_end = preset.lr_end;
  cfg.dropout_input = preset.dropout_input;
  cfg.dropout_hidden = preset.dropout_hidden;
  cfg.t_train = preset.t_train;
  cfg.loss_target = preset.loss_target;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(lr_end > 0.0) || !(lr_start >= lr_end)) {
    throw ValidationError("learning rates need lr_start >= lr_end > 0");
  }
  if (t_train < 1) throw ValidationError("t_train must be at least 1");
  for (double r : {dropout_input, dropout_hidden}) {
    if (!(r >= 0.0 && r < 1.0)) throw ValidationError("dropout ratios must lie in [0, 1)");
  }
  ste().validate();
}

double lr_exponential_decay(double epoch, const LrSchedule& schedule) {
  if (schedule.total_epochs < 2) return schedule.lr_start;
  const double last = static_cast<double>(schedule.total_epochs - 1);
  if (epoch <= 0.0) return schedule.lr_start;
  if (epoch >= last) return schedule.lr_end;
  return schedule.lr_start *
         std::pow(schedule.lr_end / schedule.lr_start, epoch / last);
}

DualTaskTargets DualTaskTargets::from(int digit, Direction direction) {
  DualTaskTargets t{std::vector<float>(10, -1.0f), std::vector<float>(2, -1.0f)};
  if (digit < 0 || digit > 9) throw ValidationError("digit label out of range");
  t.digit[static_cast<std::size_t>(digit)] = 1.0f;
  t.motion[static_cast<std::size_t>(direction)] = 1.0f;
  return t;
}

Tensor class_targets(int label, std::size_t outputs) {
  if (label < 0 || static_cast<std::size_t>(label) >= outputs) {
    throw ValidationError("label " + std::to_string(label) + " outside " +
                          std::to_string(outputs) + " outputs");
  }
  Tensor t({outputs}, -1.0f);
  t[static_cast<std::size_t>(label)] = 1.0f;
  return t;
}

Tensor make_targets(int digit, Direction direction, std::size_t outputs) {
  switch (outputs) {
    case 2:
      return class_targets(static_cast<int>(direction), 2);
    case 10:
      return class_targets(digit, 10);
    case 12: {
      const auto dual = DualTaskTargets::from(digit, direction);
      std::vector<float> row = dual.digit;
      row.insert(row.end(), dual.motion.begin(), dual.motion.end());
      return Tensor({12}, std::move(row));
    }
    default:
      throw ValidationError("no target layout for " + std::to_string(outputs) + " outputs");
  }
}

TrainingState::TrainingState(Network network) : net(std::move(network)) {
  for (const auto& l : net.layers) {
    weight_adam.push_back(AdamState::for_param(l.weights));
    bias_adam.push_back(AdamState::for_param(l.bias));
  }
}

namespace {

DropoutMasks<float> sample_masks(const Network& net, const TrainConfig& cfg, Rng& rng) {
  DropoutMasks<float> masks(net.layers.size());
  const auto shapes = net.activation_shapes();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (net.layers[l].kind != LayerKind::dense) continue;
    const double ratio = l == 0 ? cfg.dropout_input : cfg.dropout_hidden;
    masks[l] = make_dropout_mask<float>(shapes[l], ratio, rng, true);
  }
  return masks;
}

std::string layer_stats(const Network& net) {
  std::ostringstream os;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!net.layers[l].has_params()) continue;
    double max_abs = 0.0;
    bool finite = true;
    for (float w : net.layers[l].weights.data) {
      finite = finite && std::isfinite(w);
      max_abs = std::max(max_abs, static_cast<double>(std::fabs(w)));
    }
    os << " layer" << l << "{max|w|=" << max_abs << (finite ? "" : ", non-finite") << "}";
  }
  return os.str();
}

void apply_updates(TrainingState& state, const std::vector<Gradients>& grads, double lr) {
  for (std::size_t l = 0; l < state.net.layers.size(); ++l) {
    auto& layer = state.net.layers[l];
    if (!layer.has_params()) continue;
    const std::string name = "layer" + std::to_string(l);
    adam_step(layer.weights, grads[l].weights, state.weight_adam[l], lr, name + ".weights");
    adam_step(layer.bias, grads[l].bias, state.bias_adam[l], lr, name + ".bias");
  }
}

void check_loss(double loss, std::size_t batch, const Network& net) {
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at batch " + std::to_string(batch) + ";" +
                       layer_stats(net));
  }
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span(order), rng);
  return order;
}

void copy_row(Tensor& dst, std::size_t row, const Tensor& src) {
  std::copy(src.data.begin(), src.data.end(),
            dst.data.begin() + static_cast<std::ptrdiff_t>(row * src.size()));
}

Tensor row_of(const Tensor& m, std::size_t row) {
  const std::size_t c = m.dim(1);
  const auto first = m.data.begin() + static_cast<std::ptrdiff_t>(row * c);
  return Tensor({c}, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(c)));
}

}  // namespace

EpochResult train_epoch_dc(TrainingState& state, std::span<const ImageSample> data,
                           const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (state.net.model != NeuronModel::dc) throw ValidationError("train_epoch_dc needs a DC model");
  if (cfg.t_train != 1) throw ValidationError("SNN-DC trains on single time steps (t_train = 1)");
  Network& net = state.net;
  const std::size_t outputs = net.output_size();
  const double lr = lr_exponential_decay(static_cast<double>(state.epoch),
                                         {cfg.lr_start, cfg.lr_end, cfg.epochs});
  const auto order = shuffled_order(data.size(), rng);
  auto grads = zero_gradients(net);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
    const std::size_t n = std::min(cfg.batch_size, order.size() - start);
    Tensor logits({n, outputs});
    Tensor targets({n, outputs});
    std::vector<DcPass<float>> passes;
    std::vector<DropoutMasks<float>> masks;
    passes.reserve(n);
    masks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& sample = data[order[start + i]];
      const Tensor x = bernoulli_encode(sample.pixels, rng).to_tensor<float>();
      masks.push_back(sample_masks(net, cfg, rng));
      passes.push_back(forward_dc(net, x, cfg.theta, Activation::binary, masks.back()));
      copy_row(logits, i, passes.back().output_potential);
      copy_row(targets, i, class_targets(sample.label, outputs));
      correct += argmax_lowest(passes.back().output_potential.span()) ==
                 static_cast<std::size_t>(sample.label);
    }
    const auto loss = squared_hinge_loss(logits, targets);
    check_loss(loss.loss, batch, net);
    for (auto& g : grads) g.zero();
    for (std::size_t i = 0; i < n; ++i) {
      backward_dc(net, passes[i], row_of(loss.grad, i), grads, masks[i]);
    }
    apply_updates(state, grads, lr);
    loss_sum += loss.loss * static_cast<double>(n);
  }
  state.epoch += 1;
  const double total = static_cast<double>(std::max<std::size_t>(1, data.size()));
  return {loss_sum / total, static_cast<double>(correct) / total, lr};
}

template <class Real>
BasicTensor<Real> counts_to_margins(const BasicTensor<Real>& counts, std::size_t steps) {
  BasicTensor<Real> m(counts.shape);
  const double half = static_cast<double>(steps) / 2.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    m[i] = static_cast<Real>((static_cast<double>(counts[i]) - half) / half);
  }
  return m;
}

template BasicTensor<float> counts_to_margins(const BasicTensor<float>&, std::size_t);
template BasicTensor<double> counts_to_margins(const BasicTensor<double>&, std::size_t);

LossResult<float> spike_count_loss(const Tensor& counts, const Tensor& targets,
                                   std::size_t steps) {
  auto result = squared_hinge_loss(counts_to_margins(counts, steps), targets);
  const float scale = static_cast<float>(2.0 / static_cast<double>(steps));
  for (auto& g : result.grad.data) g *= scale;
  return result;
}

namespace {

std::size_t motion_offset(std::size_t outputs) {
  if (outputs == 2) return 0;
  if (outputs == 12) return 10;
  return outputs;  // no motion outputs
}

bool has_digits(std::size_t outputs) { return outputs == 10 || outputs == 12; }

}  // namespace

EpochResult train_epoch_ct(TrainingState& state, std::span<const SpikeFrameSequence> data,
                           const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (state.net.model != NeuronModel::ct) throw ValidationError("train_epoch_ct needs a CT model");
  Network& net = state.net;
  const std::size_t outputs = net.output_size();
  const std::size_t moff = motion_offset(outputs);
  const double lr = lr_exponential_decay(static_cast<double>(state.epoch),
                                         {cfg.lr_start, cfg.lr_end, cfg.epochs});
  const auto order = shuffled_order(data.size(), rng);
  auto grads = zero_gradients(net);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
    const std::size_t n = std::min(cfg.batch_size, order.size() - start);
    Tensor counts({n, outputs});
    Tensor targets({n, outputs});
    std::vector<CtPass<float>> passes;
    std::vector<DropoutMasks<float>> masks;
    passes.reserve(n);
    masks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& seq = data[order[start + i]];
      if (seq.steps() != cfg.t_train) {
        throw ValidationError("sequence has " + std::to_string(seq.steps()) +
                              " steps, t_train is " + std::to_string(cfg.t_train));
      }
      std::vector<Tensor> inputs;
      inputs.reserve(seq.steps());
      for (const auto& f : seq.frames) inputs.push_back(f.to_tensor<float>());
      masks.push_back(sample_masks(net, cfg, rng));
      passes.push_back(forward_ct<float>(net, inputs, cfg.theta, Activation::binary, masks.back()));
      copy_row(counts, i, passes.back().counts);
      copy_row(targets, i, make_targets(seq.meta.digit, seq.meta.direction, outputs));
      const auto& c = passes.back().counts;
      if (moff < outputs) {
        const std::size_t pred = argmax_lowest(std::span<const float>(c.data).subspan(moff, 2));
        correct += pred == static_cast<std::size_t>(seq.meta.direction);
      } else {
        correct += argmax_lowest(c.span()) == static_cast<std::size_t>(seq.meta.digit);
      }
    }
    const auto loss = spike_count_loss(counts, targets, cfg.t_train);
    check_loss(loss.loss, batch, net);
    for (auto& g : grads) g.zero();
    for (std::size_t i = 0; i < n; ++i) {
      backward_ct(net, passes[i], row_of(loss.grad, i), cfg.ste(), grads, masks[i]);
    }
    apply_updates(state, grads, lr);
    loss_sum += loss.loss * static_cast<double>(n);
  }
  state.epoch += 1;
  const double total = static_cast<double>(std::max<std::size_t>(1, data.size()));
  return {loss_sum / total, static_cast<double>(correct) / total, lr};
}

std::uint64_t sample_key(const ImageSample& sample) {
  return Fnv1a()
      .add(sample.pixels)
      .add(static_cast<std::uint64_t>(static_cast<std::int64_t>(sample.label)))
      .value();
}

std::vector<SpikeFrame> encode_image(const ImageSample& sample, std::size_t steps,
                                     std::uint64_t seed, std::uint64_t trial) {
  Rng rng(derive_seed(seed, trial, sample_key(sample)));
  std::vector<SpikeFrame> frames;
  frames.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) frames.push_back(bernoulli_encode(sample.pixels, rng, t));
  return frames;
}

std::size_t predict_dc(const Network& net, const SpikeFrame& frame, double theta) {
  const auto pass = forward_dc(net, frame.to_tensor<float>(), theta);
  return argmax_lowest(pass.output_potential.span());
}

AccuracyCurve evaluate_dc(const Network& net, std::span<const ImageSample> images,
                          const DcEvalOptions& opts) {
  if (opts.steps < 1) throw ValidationError("evaluate_dc needs at least one time step");
  if (opts.trials < 1) throw ValidationError("evaluate_dc needs at least one trial");
  const std::size_t outputs = net.output_size();
  AccuracyCurve curve;
  curve.mean.assign(opts.steps, 0.0);
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    std::vector<std::size_t> correct(opts.steps, 0);
    for (const auto& sample : images) {
      const auto frames = encode_image(sample, opts.steps, opts.seed, trial);
      std::vector<double> score(outputs, 0.0);
      for (std::size_t t = 0; t < opts.steps; ++t) {
        const auto pass = forward_dc(net, frames[t].to_tensor<float>(), opts.theta);
        const auto& source = opts.readout == DcReadout::potential_sum ? pass.output_potential
                                                                      : pass.output_spikes;
        for (std::size_t k = 0; k < outputs; ++k) score[k] += source[k];
        correct[t] += argmax_lowest(std::span<const double>(score)) ==
                      static_cast<std::size_t>(sample.label);
      }
    }
    std::vector<double> acc(opts.steps);
    for (std::size_t t = 0; t < opts.steps; ++t) {
      acc[t] = images.empty() ? 0.0
                              : static_cast<double>(correct[t]) /
                                    static_cast<double>(images.size());
      curve.mean[t] += acc[t] / static_cast<double>(opts.trials);
    }
    curve.per_trial.push_back(std::move(acc));
  }
  return curve;
}

std::vector<std::vector<float>> cumulative_counts(const Network& net,
                                                  const SpikeFrameSequence& seq,
                                                  std::size_t steps, double theta) {
  if (steps > seq.steps()) {
    throw ValidationError("requested " + std::to_string(steps) + " steps from a " +
                          std::to_string(seq.steps()) + "-step sequence");
  }
  std::vector<Tensor> inputs;
  for (std::size_t t = 0; t < steps; ++t) inputs.push_back(seq.frames[t].to_tensor<float>());
  const auto pass = forward_ct<float>(net, inputs, theta);
  std::vector<std::vector<float>> out(steps + 1, std::vector<float>(net.output_size(), 0.0f));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < net.output_size(); ++k) {
      out[t + 1][k] = out[t][k] + pass.output_spikes[t][k];
    }
  }
  return out;
}

CtEvalResult evaluate_ct(const Network& net, std::span<const SpikeFrameSequence> data,
                         std::size_t steps, double theta) {
  const std::size_t outputs = net.output_size();
  const std::size_t moff = motion_offset(outputs);
  const bool digits = has_digits(outputs);
  std::vector<std::size_t> digit_ok(steps + 1, 0), motion_ok(steps + 1, 0);
  for (const auto& seq : data) {
    const auto counts = cumulative_counts(net, seq, steps, theta);
    for (std::size_t t = 0; t <= steps; ++t) {
      std::span<const float> row(counts[t]);
      if (digits) {
        digit_ok[t] += argmax_lowest(row.subspan(0, 10)) ==
                       static_cast<std::size_t>(seq.meta.digit);
      }
      if (moff < outputs) {
        motion_ok[t] += argmax_lowest(row.subspan(moff, 2)) ==
                        static_cast<std::size_t>(seq.meta.direction);
      }
    }
  }
  CtEvalResult result;
  const double n = static_cast<double>(std::max<std::size_t>(1, data.size()));
  for (std::size_t t = 0; t <= steps; ++t) {
    if (digits) result.digit_accuracy.push_back(static_cast<double>(digit_ok[t]) / n);
    if (moff < outputs) result.motion_accuracy.push_back(static_cast<double>(motion_ok[t]) / n);
  }
  return result;
}

}  // namespace dtsnn
