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

#include "dtsnn/errors.hpp"
#include "dtsnn/spiking.hpp"
#include "test_util.hpp"

using namespace dtsnn;
using dtsnn::testing::central_diff;
using dtsnn::testing::close_rel;
using dtsnn::testing::fill_uniform;

namespace {

using D = double;

BasicLayerParams<D> dense(std::size_t out, std::size_t in, std::vector<double> w,
                          std::vector<double> b) {
  auto p = BasicLayerParams<D>::dense(out, in);
  p.weights.data = std::move(w);
  p.bias.data = std::move(b);
  return p;
}

bool near_kink(const BasicTensor<D>& v, double margin) {
  for (double x : v.data) {
    if (std::abs(x) < margin || std::abs(x - 2.0) < margin) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("binary activation is a strict threshold") {
  CHECK(binary_activation(1.5, 1) == 1);
  CHECK(binary_activation(1.0, 1) == 0);
  CHECK(binary_activation(-3.2, 1) == 0);
  CHECK(binary_activation(std::nextafter(1.0, 2.0), 1) == 1);
}

TEST_CASE("straight-through gradient window") {
  CHECK(ste_gradient(0.0) == 0.5);
  CHECK(ste_gradient(2.0) == 0.5);
  CHECK(ste_gradient(1.0) == 0.5);
  CHECK(ste_gradient(2.001) == 0.0);
  CHECK(ste_gradient(-0.5) == 0.0);
  CHECK(ste_gradient(std::nextafter(0.0, -1.0)) == 0.0);
  CHECK(ste_gradient(std::nextafter(2.0, 3.0)) == 0.0);
}

TEST_CASE("hs surrogate slope equals the estimator inside the window") {
  for (double x : {0.1, 0.7, 1.0, 1.9}) {
    const double h = 1e-6;
    CHECK((hs_surrogate(x + h) - hs_surrogate(x - h)) / (2 * h) == doctest::Approx(ste_gradient(x)));
  }
  CHECK(hs_surrogate(-1) == 0);
  CHECK(hs_surrogate(3) == 1);
}

TEST_CASE("ste config accepts theta 1 only") {
  const SteConfig good{1.0, ResetGrad::ste};
  const SteConfig bad{0.5, ResetGrad::ste};
  CHECK_NOTHROW(good.validate());
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("dc layer examples") {
  auto p = dense(1, 2, {0.6, 0.6}, {0});
  auto out = snn_dc_layer(BasicTensor<D>({2}, {1, 1}), p, 1.0);
  CHECK(out.v[0] == doctest::Approx(1.2));
  CHECK(out.spikes[0] == 1);

  out = snn_dc_layer(BasicTensor<D>({2}, {0, 0}), p, 1.0);
  CHECK(out.v[0] == 0);
  CHECK(out.spikes[0] == 0);

  auto biased = dense(1, 2, {0.6, 0.6}, {2});
  out = snn_dc_layer(BasicTensor<D>({2}, {0, 0}), biased, 1.0);
  CHECK(out.spikes[0] == 1);
}

TEST_CASE("dc layer on spike frames matches the tensor path") {
  Rng rng(12);
  auto p = LayerParams::dense(20, 40);
  glorot_init(p, rng);
  for (auto& b : p.bias.data) b = static_cast<float>(uniform(rng, -0.5, 1.5));
  SpikeFrame in(40, 3);
  for (auto& b : in.bits) b = bernoulli(rng, 0.4);
  auto [frame, v] = snn_dc_layer(in, p, 1.0);
  const auto ref = snn_dc_layer(in.to_tensor<float>(), p, 1.0);
  CHECK(frame.step == 3);
  CHECK(frame == SpikeFrame::from_tensor(ref.spikes));
  CHECK(v.data == ref.v.data);
}

TEST_CASE("dc backward examples") {
  auto p = dense(1, 1, {0.0}, {1.0});
  auto grads = BasicGradients<D>::zeros_like(p);
  BasicTensor<D> in({1}, {1.0});
  auto out = snn_dc_layer(in, p, 1.0);
  REQUIRE(out.v[0] == 1.0);
  snn_dc_backward(BasicTensor<D>({1}, {1.0}), out.v, in, p, grads);
  CHECK(grads.weights[0] == 0.5);

  auto dead = dense(2, 2, {1, 1, -1, -1}, {2, -1});
  auto g2 = BasicGradients<D>::zeros_like(dead);
  BasicTensor<D> x({2}, {1, 1});
  auto o2 = snn_dc_layer(x, dead, 1.0);
  const auto gx = snn_dc_backward(BasicTensor<D>({2}, {1, 1}), o2.v, x, dead, g2);
  for (double g : g2.weights.data) CHECK(g == 0);
  for (double g : g2.bias.data) CHECK(g == 0);
  for (double g : gx.data) CHECK(g == 0);
}

TEST_CASE("dc backward equals finite differences of the surrogate layer") {
  Rng rng(21);
  int checked = 0;
  while (checked < 20) {
    auto p = BasicLayerParams<D>::dense(5, 7);
    fill_uniform(p.weights, rng, -1, 1);
    fill_uniform(p.bias, rng, -0.5, 1.5);
    BasicTensor<D> x({7});
    fill_uniform(x, rng, 0, 1);
    BasicTensor<D> c({5});
    fill_uniform(c, rng, -1, 1);
    auto out = snn_dc_layer(x, p, 1.0, Activation::surrogate);
    if (near_kink(out.v, 1e-3)) continue;
    auto grads = BasicGradients<D>::zeros_like(p);
    const auto gx = snn_dc_backward(c, out.v, x, p, grads);
    auto f = [&] {
      const auto s = snn_dc_layer(x, p, 1.0, Activation::surrogate).spikes;
      double acc = 0;
      for (std::size_t i = 0; i < s.size(); ++i) acc += c[i] * s[i];
      return acc;
    };
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      CHECK(close_rel(grads.weights[i], central_diff(p.weights, i, f), 1e-5));
    }
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(close_rel(gx[i], central_diff(x, i, f), 1e-5));
    ++checked;
  }
}

TEST_CASE("ct step examples") {
  auto p = dense(1, 1, {0.0}, {0.9});
  auto st = BasicNeuronState<D>::zeros({1}, 1.0);
  st.v_post[0] = 0.4;
  auto out = snn_ct_step(BasicTensor<D>({1}, {0.0}), p, st);
  CHECK(out.state.v_pre[0] == doctest::Approx(1.3));
  CHECK(out.spikes[0] == 1);
  CHECK(out.state.v_post[0] == doctest::Approx(0.3));

  p.bias[0] = 0.3;
  out = snn_ct_step(BasicTensor<D>({1}, {0.0}), p, st);
  CHECK(out.state.v_pre[0] == doctest::Approx(0.7));
  CHECK(out.spikes[0] == 0);
  CHECK(out.state.v_post[0] == doctest::Approx(0.7));

  p.bias[0] = 0.0;
  out = snn_ct_step(BasicTensor<D>({1}, {0.0}), p, BasicNeuronState<D>::zeros({1}, 1.0));
  CHECK(out.state.v_pre[0] == 0);
  CHECK(out.state.v_post[0] == 0);
  CHECK(out.spikes[0] == 0);
}

TEST_CASE("ct membrane is not clamped below zero") {
  auto p = dense(1, 1, {-3.0}, {0.0});
  auto out = snn_ct_step(BasicTensor<D>({1}, {1.0}), p, BasicNeuronState<D>::zeros({1}, 1.0));
  CHECK(out.state.v_post[0] == -3.0);
}

TEST_CASE("ct state shape must match the layer") {
  auto p = BasicLayerParams<D>::dense(3, 2);
  CHECK_THROWS_AS(snn_ct_step(BasicTensor<D>({2}), p, BasicNeuronState<D>::zeros({4}, 1.0)),
                  DimensionError);
}

TEST_CASE("reset path factors") {
  const SteConfig ste{1.0, ResetGrad::ste};
  const SteConfig detached{1.0, ResetGrad::detached};
  CHECK(reset_path_factor(1.0, ste) == 0.5);
  CHECK(reset_path_factor(3.0, ste) == 1.0);
  CHECK(reset_path_factor(1.0, detached) == 1.0);

  auto p = dense(1, 1, {0.3}, {0.1});
  auto grads = BasicGradients<D>::zeros_like(p);
  auto r = snn_ct_backward_step(BasicTensor<D>({1}, {0.0}), BasicTensor<D>({1}, {1.7}),
                                BasicTensor<D>({1}, {1.0}), BasicTensor<D>({1}, {1.0}), p,
                                SteConfig{1.0, ResetGrad::detached}, grads);
  CHECK(r.grad_v_pre[0] == 1.7);
  CHECK(r.grad_v_post_prev[0] == 1.7);

  r = snn_ct_backward_step(BasicTensor<D>({1}, {0.0}), BasicTensor<D>({1}, {1.0}),
                           BasicTensor<D>({1}, {1.0}), BasicTensor<D>({1}, {1.0}), p,
                           SteConfig{1.0, ResetGrad::ste}, grads);
  CHECK(r.grad_v_pre[0] == 0.5);
}

TEST_CASE("ct backward without a forward state is rejected") {
  auto p = BasicLayerParams<D>::dense(2, 2);
  auto grads = BasicGradients<D>::zeros_like(p);
  CHECK_THROWS_AS(snn_ct_backward_step(BasicTensor<D>({2}), BasicTensor<D>(), BasicTensor<D>(),
                                       BasicTensor<D>({2}), p, SteConfig{}, grads),
                  StateError);
}

TEST_CASE("unrolled two-step ct layer matches surrogate finite differences") {
  Rng rng(31);
  const SteConfig cfg{1.0, ResetGrad::ste};
  int checked = 0;
  while (checked < 20) {
    auto p = BasicLayerParams<D>::dense(2, 3);
    fill_uniform(p.weights, rng, -1, 1.5);
    fill_uniform(p.bias, rng, -0.5, 1.0);
    BasicTensor<D> x0({3}), x1({3}), c0({2}), c1({2});
    fill_uniform(x0, rng, 0, 1);
    fill_uniform(x1, rng, 0, 1);
    fill_uniform(c0, rng, -1, 1);
    fill_uniform(c1, rng, -1, 1);

    auto run = [&] {
      auto s0 = snn_ct_step(x0, p, BasicNeuronState<D>::zeros({2}, 1.0), Activation::surrogate);
      auto s1 = snn_ct_step(x1, p, s0.state, Activation::surrogate);
      return std::pair(s0, s1);
    };
    auto f = [&] {
      auto [s0, s1] = run();
      return c0[0] * s0.spikes[0] + c0[1] * s0.spikes[1] + c1[0] * s1.spikes[0] +
             c1[1] * s1.spikes[1];
    };
    auto [s0, s1] = run();
    if (near_kink(s0.state.v_pre, 1e-3) || near_kink(s1.state.v_pre, 1e-3)) continue;

    auto grads = BasicGradients<D>::zeros_like(p);
    auto b1 = snn_ct_backward_step(c1, BasicTensor<D>(), s1.state.v_pre, x1, p, cfg, grads);
    auto b0 = snn_ct_backward_step(c0, b1.grad_v_post_prev, s0.state.v_pre, x0, p, cfg, grads);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      CHECK(close_rel(grads.weights[i], central_diff(p.weights, i, f), 1e-4));
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      CHECK(close_rel(grads.bias[i], central_diff(p.bias, i, f), 1e-4));
    }
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(close_rel(b0.grad_in[i], central_diff(x0, i, f), 1e-4));
      CHECK(close_rel(b1.grad_in[i], central_diff(x1, i, f), 1e-4));
    }
    ++checked;
  }
}

TEST_CASE("spike frame conversions") {
  SpikeFrame f({1, 0, 1, 1}, 2);
  CHECK(f.popcount() == 3);
  const auto t = f.to_tensor<double>();
  CHECK(t.data == std::vector<double>{1, 0, 1, 1});
  CHECK(SpikeFrame::from_tensor(BasicTensor<double>({3}, {0, 0.5, -1})).bits ==
        std::vector<std::uint8_t>{0, 1, 1});
}
