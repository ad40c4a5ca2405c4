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

#include "dtsnn/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>

#include "dtsnn/checkpoint.hpp"
#include "dtsnn/errors.hpp"
#include "dtsnn/hwsim.hpp"
#include "dtsnn/metrics.hpp"
#include "dtsnn/quant.hpp"
#include "dtsnn/run_config.hpp"

#ifndef DTSNN_DEFAULT_DATA_DIR
#define DTSNN_DEFAULT_DATA_DIR "data"
#endif

namespace dtsnn::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kEventCanvas = 34;

class Clock {
 public:
  explicit Clock(bool enabled) : enabled_(enabled), t0_(std::chrono::steady_clock::now()) {}
  double now() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point t0_;
};

struct Recorder {
  std::string run_id;
  Clock clock;
  std::vector<MetricsRecord> rows;

  void add(const std::string& phase, std::int64_t step, const std::string& metric, double v) {
    rows.push_back({run_id, phase, step, metric, v, clock.now()});
  }
};

fs::path mnist_dir(const RunConfig& cfg) {
  return cfg.data_dir.empty() ? fs::path(DTSNN_DEFAULT_DATA_DIR) / "mnist" : cfg.data_dir;
}

fs::path find_idx(const fs::path& dir, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    for (const char* ext : {".gz", ""}) {
      const auto p = dir / (n + ext);
      if (fs::exists(p)) return p;
    }
  }
  throw IoError("no " + names.front() + "[.gz] under " + dir.string());
}

DatasetSplit<ImageSample> load_images(const RunConfig& cfg) {
  const auto dir = mnist_dir(cfg);
  const auto images = find_idx(dir, {"images-idx3-ubyte", "train-images-idx3-ubyte"});
  const auto labels = find_idx(dir, {"labels-idx1-ubyte", "train-labels-idx1-ubyte"});
  return split_dataset(load_mnist(images, labels), cfg.n_train, cfg.n_val, cfg.n_test);
}

SpikeFrameSequence frames_from_events(const std::vector<EventRecord>& events, int digit,
                                      const std::string& id, const RunConfig& cfg,
                                      std::size_t steps) {
  auto seq = bin_events_to_frames(events, steps, cfg.window_us, PolarityFilter::both,
                                  kEventCanvas);
  seq.meta = {id, Direction::down, digit};
  return seq;
}

struct SequenceSplit {
  std::vector<SpikeFrameSequence> train;
  std::vector<SpikeFrameSequence> validation;
  std::vector<SpikeFrameSequence> test;
};

SequenceSplit load_sequences(const RunConfig& cfg, std::size_t steps, std::size_t outputs) {
  SequenceSplit out;
  const std::uint64_t seed = cfg.train.seed;
  if (cfg.dataset == "bar") {
    out.train = make_moving_bar_dataset(cfg.n_train, steps, cfg.grid, derive_seed(seed, 0xba7, 0));
    out.test = make_moving_bar_dataset(cfg.n_test, steps, cfg.grid, derive_seed(seed, 0xba7, 1));
    out.validation = make_moving_bar_dataset(cfg.n_val, steps, cfg.grid, derive_seed(seed, 0xba7, 2));
    return out;
  }
  std::vector<SpikeFrameSequence> all;
  if (cfg.dataset == "events") {
    if (cfg.data_dir.empty()) throw IoError("events dataset needs data_dir");
    auto samples = load_event_dataset(cfg.data_dir);
    Rng rng(derive_seed(seed, 0xe7, 0));
    shuffle(std::span(samples), rng);
    for (const auto& s : samples) all.push_back(frames_from_events(s.events, s.label, s.id, cfg, steps));
  } else if (cfg.dataset == "saccade") {
    const auto images = load_images(cfg);
    for (const auto* part : {&images.train, &images.validation, &images.test}) {
      for (const auto& img : *part) {
        Rng rng(derive_seed(seed, 0x5acc, sample_key(img)));
        const auto events = render_saccade_events(img, rng);
        all.push_back(frames_from_events(events, img.label, std::to_string(all.size()), cfg, steps));
      }
    }
  } else {
    throw ValidationError("dataset '" + cfg.dataset + "' has no spike sequences; use events, "
                          "saccade or bar");
  }
  const auto split = split_dataset(all, cfg.n_train, cfg.n_val, cfg.n_test);
  out.train = split.train;
  out.validation = split.validation;
  out.test = split.test;
  if (outputs != 10) {
    out.train = augment_with_reversed(out.train);
    out.validation = augment_with_reversed(out.validation);
    out.test = augment_with_reversed(out.test);
  }
  return out;
}

void check_input_width(const ModelPreset& p, std::size_t width) {
  if (shape_size(p.input_shape) != width) {
    throw ValidationError("preset " + p.id + " expects " + std::to_string(shape_size(p.input_shape)) +
                          " inputs, dataset provides " + std::to_string(width));
  }
}

std::uint64_t training_hash(const RunConfig& cfg) {
  Fnv1a h;
  const RunConfig& c = cfg;
  h.add(c.train.preset).add(c.dataset).add(c.n_train).add(c.n_test);
  if (c.n_val > 0) h.add(c.n_val);
  h.add(c.train.epochs).add(c.train.batch_size).add(c.train.t_train).add(c.train.seed);
  for (double d : {c.train.lr_start, c.train.lr_end, c.train.theta, c.train.dropout_input,
                   c.train.dropout_hidden}) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    h.add(bits);
  }
  h.add(static_cast<std::uint64_t>(c.train.loss_target));
  h.add(static_cast<std::uint64_t>(c.train.reset_grad));
  return h.value();
}

int run_train(const RunConfig& cfg, std::ostream& out) {
  const auto& preset = find_preset(cfg.train.preset);
  Recorder rec{cfg.resolved_run_id(), Clock(cfg.record_time), {}};
  Rng rng(cfg.train.seed);
  TrainingState st(build_network<float>(preset, rng));

  std::optional<DatasetSplit<ImageSample>> images;
  std::optional<SequenceSplit> seqs;
  if (preset.model == NeuronModel::dc) {
    images = load_images(cfg);
  } else {
    seqs = load_sequences(cfg, cfg.train.t_train, st.net.output_size());
    if (!seqs->train.empty()) check_input_width(preset, seqs->train.front().width());
  }
  echo_config(cfg);

  // Digit accuracy when the head has digit outputs, motion accuracy otherwise.
  auto score = [&](const Network& net, bool validation) {
    if (preset.model == NeuronModel::dc) {
      DcEvalOptions opts{1, cfg.trials, cfg.readout, cfg.train.theta, cfg.train.seed};
      return evaluate_dc(net, validation ? images->validation : images->test, opts).mean[0];
    }
    const std::size_t T = cfg.train.t_train;
    const auto r = evaluate_ct(net, validation ? seqs->validation : seqs->test, T, cfg.train.theta);
    return r.digit_accuracy.empty() ? r.motion_accuracy[T] : r.digit_accuracy[T];
  };
  const bool have_val = preset.model == NeuronModel::dc ? !images->validation.empty()
                                                        : !seqs->validation.empty();
  std::optional<Network> best;
  double best_val = -1.0;
  std::size_t best_epoch = 0;

  for (std::size_t e = 0; e < cfg.train.epochs; ++e) {
    const auto r = preset.model == NeuronModel::dc
                       ? train_epoch_dc(st, images->train, cfg.train, rng)
                       : train_epoch_ct(st, seqs->train, cfg.train, rng);
    const auto step = static_cast<std::int64_t>(e);
    rec.add("train", step, "loss", r.loss);
    rec.add("train", step, "train_accuracy", r.train_accuracy);
    rec.add("train", step, "lr", r.lr);
    out << "epoch " << e << " loss " << r.loss << " train_acc " << r.train_accuracy << " lr "
        << r.lr;
    if (have_val) {
      const double v = score(st.net, true);
      rec.add("train", step, "val_accuracy", v);
      out << " val_acc " << v;
      if (v > best_val) best_val = v, best_epoch = e, best = st.net;
    }
    out << '\n';
  }
  if (best) {
    const double t = score(*best, false);
    rec.add("eval", static_cast<std::int64_t>(best_epoch), "best_val_test_accuracy", t);
    out << "best validation epoch " << best_epoch << ", its test accuracy " << t << '\n';
  }

  if (preset.model == NeuronModel::dc) {
    DcEvalOptions opts{1, cfg.trials, cfg.readout, cfg.train.theta, cfg.train.seed};
    const auto curve = evaluate_dc(st.net, images->test, opts);
    rec.add("eval", 1, "test_accuracy", curve.mean[0]);
    out << "test accuracy (T=1, " << cfg.trials << " trials) " << curve.mean[0] << '\n';
  } else {
    const std::size_t T = cfg.train.t_train;
    const auto r = evaluate_ct(st.net, seqs->test, T, cfg.train.theta);
    if (!r.digit_accuracy.empty()) rec.add("eval", static_cast<std::int64_t>(T), "digit_accuracy", r.digit_accuracy[T]);
    if (!r.motion_accuracy.empty()) rec.add("eval", static_cast<std::int64_t>(T), "motion_accuracy", r.motion_accuracy[T]);
    if (!r.digit_accuracy.empty()) out << "test digit accuracy " << r.digit_accuracy[T] << '\n';
    if (!r.motion_accuracy.empty()) out << "test motion accuracy " << r.motion_accuracy[T] << '\n';
  }

  const auto ckpt = cfg.out_dir / "model.ckpt";
  save_checkpoint(st.net,
                  {static_cast<std::uint32_t>(st.epoch), cfg.train.seed, training_hash(cfg)}, ckpt);
  emit_metrics(rec.rows, cfg.out_dir / ("metrics_" + cfg.subcommand + ".tsv"));
  out << "wrote " << ckpt.string() << '\n';
  return kExitOk;
}

int run_eval(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_checkpoint(cfg.checkpoint_path(),
                                      cfg.preset_explicit ? std::optional(cfg.train.preset) : std::nullopt);
  const Network& net = loaded.net;
  Recorder rec{cfg.resolved_run_id(), Clock(cfg.record_time), {}};
  if (net.model == NeuronModel::dc) {
    const auto images = load_images(cfg);
    echo_config(cfg);
    DcEvalOptions opts{cfg.steps, cfg.trials, cfg.readout, cfg.train.theta, cfg.train.seed};
    const auto curve = evaluate_dc(net, images.test, opts);
    for (std::size_t t = 1; t <= cfg.steps; ++t) {
      double mean = curve.mean[t - 1];
      double var = 0.0;
      for (const auto& trial : curve.per_trial) var += (trial[t - 1] - mean) * (trial[t - 1] - mean);
      var /= static_cast<double>(curve.per_trial.size());
      rec.add("eval", static_cast<std::int64_t>(t), "accuracy", mean);
      rec.add("eval", static_cast<std::int64_t>(t), "accuracy_std", std::sqrt(var));
      out << "T=" << t << " accuracy " << mean << '\n';
    }
  } else {
    const auto seqs = load_sequences(cfg, cfg.steps, net.output_size());
    echo_config(cfg);
    const auto r = evaluate_ct(net, seqs.test, cfg.steps, cfg.train.theta);
    for (std::size_t t = 0; t <= cfg.steps; ++t) {
      const auto step = static_cast<std::int64_t>(t);
      if (!r.digit_accuracy.empty()) rec.add("eval", step, "digit_accuracy", r.digit_accuracy[t]);
      if (!r.motion_accuracy.empty()) rec.add("eval", step, "motion_accuracy", r.motion_accuracy[t]);
      out << "t=" << t;
      if (!r.digit_accuracy.empty()) out << " digit " << r.digit_accuracy[t];
      if (!r.motion_accuracy.empty()) out << " motion " << r.motion_accuracy[t];
      out << '\n';
    }
  }
  emit_metrics(rec.rows, cfg.out_dir / ("metrics_" + cfg.subcommand + ".tsv"));
  return kExitOk;
}

// Labeled frame sets for quantized evaluation: DC images are encoded once per
// trial, CT sequences are used as they are.
std::pair<std::vector<LabeledFrames>, SweepOptions> labeled_test_frames(const RunConfig& cfg,
                                                                       NeuronModel model,
                                                                       std::size_t outputs) {
  std::vector<LabeledFrames> data;
  SweepOptions opts;
  opts.theta = cfg.train.theta;
  if (model == NeuronModel::dc) {
    const auto images = load_images(cfg);
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      for (const auto& s : images.test) {
        data.push_back({encode_image(s, cfg.steps, cfg.train.seed, trial), s.label});
      }
    }
    opts.label_width = outputs;
  } else {
    const auto seqs = load_sequences(cfg, cfg.steps, outputs);
    for (const auto& s : seqs.test) {
      if (outputs == 2) {
        data.push_back({s.frames, static_cast<int>(s.meta.direction)});
      } else {
        data.push_back({s.frames, s.meta.digit});
      }
    }
    opts.label_width = outputs == 2 ? 2 : 10;
  }
  return {std::move(data), opts};
}

int run_quantize(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_checkpoint(cfg.checkpoint_path(),
                                      cfg.preset_explicit ? std::optional(cfg.train.preset) : std::nullopt);
  const Network& net = loaded.net;
  const auto q = quantize_model(net, cfg.bits, cfg.train.theta);
  Recorder rec{cfg.resolved_run_id(), Clock(cfg.record_time), {}};

  std::vector<LabeledFrames> data;
  SweepOptions opts;
  if (cfg.sweep) std::tie(data, opts) = labeled_test_frames(cfg, net.model, net.output_size());
  echo_config(cfg);
  const auto path = cfg.out_dir / "model.q";
  save_quantized(q, path);
  for (std::size_t l = 0; l < q.layers.size(); ++l) {
    rec.add("quantize", static_cast<std::int64_t>(l), "scale", q.layers[l].scale());
    rec.add("quantize", static_cast<std::int64_t>(l), "theta_q", q.layers[l].theta_q());
  }
  out << "wrote " << path.string() << " (" << cfg.bits << "-bit)\n";

  if (cfg.sweep) {
    const std::vector<int> bits = {2, 3, 4, 5, 6, 7, 8};
    out << "float accuracy " << float_accuracy(net, data, opts) << '\n';
    for (const auto& row : precision_sweep(net, data, bits, opts)) {
      rec.add("sweep", row.bits, "accuracy", row.accuracy);
      out << "B=" << row.bits << " accuracy " << row.accuracy << " agreement " << row.agreement
          << '\n';
    }
  }
  emit_metrics(rec.rows, cfg.out_dir / ("metrics_" + cfg.subcommand + ".tsv"));
  return kExitOk;
}

void add_counters(ActivityCounters& total, const ActivityCounters& c) {
  if (total.layers() == 0) {
    total = c;
    return;
  }
  total.total_cycles += c.total_cycles;
  for (std::size_t l = 0; l < c.layers(); ++l) {
    total.weight_row_fetches[l] += c.weight_row_fetches[l];
    total.accumulate_ops[l] += c.accumulate_ops[l];
    total.fire_checks[l] += c.fire_checks[l];
    total.integrating_cycles[l] += c.integrating_cycles[l];
    total.stall_cycles[l] += c.stall_cycles[l];
    total.active_spikes[l].insert(total.active_spikes[l].end(), c.active_spikes[l].begin(),
                                  c.active_spikes[l].end());
  }
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto model = load_quantized(cfg.model_path());
  const EnergyCoefficients coeffs =
      cfg.coeffs.empty() ? EnergyCoefficients{} : load_energy_coefficients(cfg.coeffs);
  RunConfig data_cfg = cfg;
  data_cfg.trials = 1;
  data_cfg.n_test = std::min(cfg.n_test, cfg.samples);
  data_cfg.n_train = cfg.dataset == "bar" ? 0 : cfg.n_train;
  auto [data, opts] = labeled_test_frames(data_cfg, model.model, model.output_size());
  if (data.size() > cfg.samples) data.resize(cfg.samples);
  echo_config(cfg);

  std::ofstream trace;
  SimConfig sim;
  sim.latch_cycles = cfg.latch_cycles;
  sim.bias_fire_cycles = cfg.bias_fire_cycles;
  sim.handshake_cycles = cfg.handshake_cycles;
  if (cfg.trace) {
    trace.open(cfg.out_dir / "trace.txt");
    if (!trace) throw IoError("cannot write " + (cfg.out_dir / "trace.txt").string());
    trace << "# cycle layer phase index\n";
    sim.trace = &trace;
  }

  Recorder rec{cfg.resolved_run_id(), Clock(cfg.record_time), {}};
  ActivityCounters total;
  std::size_t mismatches = 0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (cfg.trace) trace << "# sample " << i << '\n';
    const auto r = pipeline_simulate(model, data[i].frames, sim);
    const auto ref = quantized_run(model, data[i].frames);
    if (r.layer_outputs != ref.layer_outputs) ++mismatches;
    rec.add("simulate", static_cast<std::int64_t>(i), "cycles", static_cast<double>(r.counters.total_cycles));
    add_counters(total, r.counters);
    steps += data[i].frames.size();
  }

  const auto sparsity = report_sparsity(total, model, steps);
  const auto energy = estimate_energy(total, coeffs);
  const double n = static_cast<double>(std::max<std::size_t>(data.size(), 1));
  for (std::size_t l = 0; l < total.layers(); ++l) {
    const auto step = static_cast<std::int64_t>(l);
    rec.add("simulate", step, "row_fetches", static_cast<double>(total.weight_row_fetches[l]));
    rec.add("simulate", step, "stall_cycles", static_cast<double>(total.stall_cycles[l]));
    rec.add("simulate", step, "sparsity", sparsity.per_layer[l]);
    rec.add("simulate", step, "energy_nj", energy.per_layer_nj[l] / n);
  }
  rec.add("simulate", -1, "sparsity_aggregate", sparsity.aggregate);
  rec.add("simulate", -1, "cycles_per_sample", static_cast<double>(total.total_cycles) / n);
  rec.add("simulate", -1, "energy_nj_per_sample", energy.total_nj / n);
  rec.add("simulate", -1, "wall_time_us_per_sample", energy.wall_time_us / n);
  rec.add("simulate", -1, "functional_mismatches", static_cast<double>(mismatches));
  emit_metrics(rec.rows, cfg.out_dir / ("metrics_" + cfg.subcommand + ".tsv"));

  out << data.size() << " samples, " << steps << " steps\n";
  out << "cycles/sample " << static_cast<double>(total.total_cycles) / n << ", wall time "
      << energy.wall_time_us / n << " us at " << coeffs.frequency_mhz << " MHz\n";
  out << "active presynaptic fraction " << sparsity.aggregate << " (per layer:";
  for (double s : sparsity.per_layer) out << ' ' << s;
  out << ")\n";
  out << "energy/sample " << energy.total_nj / n << " nJ (illustrative coefficients unless --coeffs)\n";
  if (mismatches) {
    out << mismatches << " samples differ from the functional reference\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_synth_events(const RunConfig& cfg, std::ostream& out) {
  const auto images = load_images(cfg);
  echo_config(cfg);
  const auto root = cfg.out_dir / "events";
  std::size_t n = 0;
  for (const auto* part : {&images.train, &images.validation, &images.test}) {
    for (const auto& img : *part) {
      Rng rng(derive_seed(cfg.train.seed, 0x5acc, sample_key(img)));
      const auto dir = root / std::to_string(img.label);
      fs::create_directories(dir);
      char name[32];
      std::snprintf(name, sizeof(name), "%06zu.bin", n++);
      save_aer_events(render_saccade_events(img, rng), dir / name);
    }
  }
  out << "wrote " << n << " recordings under " << root.string() << '\n';
  return kExitOk;
}

struct Options {
  std::optional<std::string> config;
  ConfigOverrides overrides;
};

void add_value(CLI::App* app, Options& o, const std::string& flag, const std::string& key,
               const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.overrides.emplace_back(key, v); }, help);
}

void add_switch(CLI::App* app, Options& o, const std::string& flag, const std::string& key,
                const std::string& help) {
  app->add_flag_callback(flag, [&o, key] { o.overrides.emplace_back(key, "true"); }, help);
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "flat key=value config file");
  app->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& items) {
        for (const auto& s : items) {
          const auto eq = s.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
          o.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
      },
      "override any config key (key=value)");
  add_value(app, o, "--preset", "preset", "model preset id");
  add_value(app, o, "--out", "out_dir", "output directory");
  add_value(app, o, "--seed", "seed", "random seed");
  add_value(app, o, "--data", "data_dir", "dataset directory");
  add_value(app, o, "--dataset", "dataset", "mnist, events, saccade or bar");
  add_value(app, o, "--n-train", "n_train", "training samples");
  add_value(app, o, "--n-test", "n_test", "held-out samples");
  add_value(app, o, "--n-val", "n_val", "validation samples for best-epoch selection");
  add_switch(app, o, "--record-time", "record_time", "fill the wall_clock_s metrics column");
}

// Re-resolves with the preset stored in a model file unless one was given.
RunConfig with_artifact_preset(const std::string& sub, const Options& o, RunConfig cfg,
                               const std::function<std::string(const RunConfig&)>& peek) {
  if (cfg.preset_explicit) return cfg;
  ConfigOverrides ov{{"preset", peek(cfg)}};
  ov.insert(ov.end(), o.overrides.begin(), o.overrides.end());
  return load_config(sub, o.config, ov);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dtsnn: discrete-time spiking neural networks", "dtsnn"};
  app.require_subcommand(1);
  Options opts;

  auto* train = app.add_subcommand("train", "train a preset (dc or ct)");
  add_common(train, opts);
  add_value(train, opts, "--epochs", "epochs", "training epochs");
  add_value(train, opts, "--batch-size", "batch_size", "minibatch size");
  add_value(train, opts, "--lr-start", "lr_start", "initial learning rate");
  add_value(train, opts, "--lr-end", "lr_end", "final learning rate");
  add_value(train, opts, "--t-train", "t_train", "time steps per training sample");
  add_value(train, opts, "--reset-grad", "reset_grad", "ste or detached");
  add_value(train, opts, "--trials", "trials", "evaluation trials");

  auto* eval = app.add_subcommand("eval", "accuracy versus time steps");
  add_common(eval, opts);
  add_value(eval, opts, "--checkpoint", "checkpoint", "checkpoint file");
  add_value(eval, opts, "--steps", "steps", "time steps");
  add_value(eval, opts, "--trials", "trials", "independent encodings to average");
  add_value(eval, opts, "--readout", "readout", "potential_sum or spike_count");

  auto* quant = app.add_subcommand("quantize", "fixed-point weights and precision sweep");
  add_common(quant, opts);
  add_value(quant, opts, "--checkpoint", "checkpoint", "checkpoint file");
  add_value(quant, opts, "--bits", "bits", "weight bits (2-8)");
  add_switch(quant, opts, "--sweep", "sweep", "evaluate every width from 2 to 8 bits");
  add_value(quant, opts, "--steps", "steps", "time steps for the sweep");
  add_value(quant, opts, "--trials", "trials", "encodings per image for the sweep");

  auto* sim = app.add_subcommand("simulate", "cycle-level pipeline simulation");
  add_common(sim, opts);
  add_value(sim, opts, "--model", "model", "quantized model file");
  add_value(sim, opts, "--coeffs", "coeffs", "energy coefficients file");
  add_switch(sim, opts, "--trace", "trace", "write a per-cycle trace to the output directory");
  add_value(sim, opts, "--samples", "samples", "number of test samples");
  add_value(sim, opts, "--steps", "steps", "time steps per sample");

  auto* synth = app.add_subcommand("synth-events", "render MNIST images as event recordings");
  add_common(synth, opts);

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(sub, opts.config, opts.overrides);
    if (sub == "train") return run_train(cfg, out);
    if (sub == "eval" || sub == "quantize") {
      cfg = with_artifact_preset(sub, opts, cfg, [](const RunConfig& c) {
        return load_checkpoint(c.checkpoint_path()).net.preset_id;
      });
      return sub == "eval" ? run_eval(cfg, out) : run_quantize(cfg, out);
    }
    if (sub == "simulate") {
      cfg = with_artifact_preset(sub, opts, cfg, [](const RunConfig& c) {
        return load_quantized(c.model_path()).preset_id;
      });
      return run_simulate(cfg, out);
    }
    return run_synth_events(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dtsnn::cli
