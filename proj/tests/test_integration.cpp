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

#include <doctest.h>

#include "dtsnn/checkpoint.hpp"
#include "dtsnn/datasets.hpp"
#include "dtsnn/encoding.hpp"
#include "dtsnn/hwsim.hpp"
#include "dtsnn/quant.hpp"
#include "dtsnn/training.hpp"
#include "test_util.hpp"

using namespace dtsnn;

namespace {

const std::filesystem::path kMnist = std::filesystem::path(DTSNN_TEST_DATA_DIR) / "mnist";

}  // namespace

TEST_CASE("moving bar: train, checkpoint, quantize, simulate") {
  const auto& preset = find_preset("bar-mlp");
  auto cfg = TrainConfig::from_preset(preset);
  cfg.epochs = 30;
  cfg.batch_size = 20;
  Rng rng(5);
  TrainingState st(build_network<float>(preset, rng));
  const auto train = make_moving_bar_dataset(400, 16, 16, 11);
  const auto test = make_moving_bar_dataset(100, 16, 16, 12);
  double first_loss = 0, last_loss = 0;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto r = train_epoch_ct(st, train, cfg, rng);
    if (e == 0) first_loss = r.loss;
    last_loss = r.loss;
  }
  CHECK(last_loss < first_loss);
  const auto acc = evaluate_ct(st.net, test, 16);
  CHECK(acc.motion_accuracy[16] > 0.8);
  CHECK(acc.motion_accuracy[0] == 0.5);

  const auto dir = testing::scratch_dir("integration_bar");
  save_checkpoint(st.net, {static_cast<std::uint32_t>(cfg.epochs), 5, 0}, dir / "m.ckpt");
  const auto back = load_checkpoint(dir / "m.ckpt", std::string("bar-mlp"));
  CHECK(evaluate_ct(back.net, test, 16).motion_accuracy == acc.motion_accuracy);

  const auto q = quantize_model(back.net, 7);
  save_quantized(q, dir / "m.q");
  const auto q2 = load_quantized(dir / "m.q");
  SweepOptions opts;
  opts.label_width = 2;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    const auto& frames = test[i].frames;
    const auto sim = pipeline_simulate(q2, frames);
    const auto ref = quantized_run(q2, frames);
    CHECK(sim.layer_outputs == ref.layer_outputs);
    const LabeledFrames lf{frames, static_cast<int>(test[i].meta.direction)};
    agree += float_predict(back.net, lf, opts) == quantized_predict(q2, lf, opts);
  }
  CHECK(agree >= 27);
}

TEST_CASE("mnist: short dc training then integer inference") {
  auto images = load_mnist(kMnist / "images-idx3-ubyte.gz", kMnist / "labels-idx1-ubyte.gz");
  const auto split = split_dataset(images, 600, 0, 200);
  const auto& preset = find_preset("mlp-128");
  auto cfg = TrainConfig::from_preset(preset);
  cfg.epochs = 5;
  cfg.batch_size = 20;
  Rng rng(9);
  TrainingState st(build_network<float>(preset, rng));
  for (std::size_t e = 0; e < cfg.epochs; ++e) train_epoch_dc(st, split.train, cfg, rng);

  const auto curve = evaluate_dc(st.net, split.test, {4, 3, DcReadout::potential_sum, 1.0, 9});
  CHECK(curve.mean[0] > 0.5);
  CHECK(curve.mean[3] >= curve.mean[0] - 0.05);

  const auto q = quantize_model(st.net, 7);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto frames = encode_image(split.test[i], 2, 9, 0);
    const auto sim = pipeline_simulate(q, frames);
    CHECK(sim.layer_outputs == quantized_run(q, frames).layer_outputs);
    CHECK(sim.counters.weight_row_fetches[0] == frames[0].popcount() + frames[1].popcount());
  }
}
