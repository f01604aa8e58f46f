// Copyright 2026 casa-sid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "casa/neural.hpp"
#include "test_util.hpp"

using namespace casa;

namespace {

// Central-difference gradient of the MLP loss w.r.t. one parameter.
double numeric_grad(Mlp& net, const std::vector<double>& x,
                    const std::vector<double>& y, double* param) {
  const double h = 1e-5;
  const double save = *param;
  *param = save + h;
  const double lp = mlp_backprop(net, x, y, nullptr);
  *param = save - h;
  const double lm = mlp_backprop(net, x, y, nullptr);
  *param = save;
  return (lp - lm) / (2.0 * h);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("forward: zero net with sigmoid head outputs 0.5") {
  Rng rng(1);
  Mlp net = make_mlp({4, 3, 1}, {Activation::kRelu}, Head::kLogistic, rng);
  for (auto& layer : net.layers) {
    for (auto& v : layer.w.data()) v = 0.0;
    for (auto& v : layer.b) v = 0.0;
  }
  auto acts = mlp_forward(net, {1.0, -2.0, 3.0, 0.5});
  CHECK(acts.back()[0] == doctest::Approx(0.5));
}

TEST_CASE("forward: identity single linear layer passes input through") {
  Rng rng(2);
  Mlp net = make_mlp({3, 3}, {}, Head::kNone, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) net.layers[0].w(i, j) = i == j ? 1.0 : 0.0;
    net.layers[0].b[i] = 0.0;
  }
  auto acts = mlp_forward(net, {0.3, -1.5, 2.0});
  CHECK(acts.back()[0] == doctest::Approx(0.3));
  CHECK(acts.back()[1] == doctest::Approx(-1.5));
  CHECK(acts.back()[2] == doctest::Approx(2.0));
}

TEST_CASE("forward: softmax head sums to one and is shift invariant") {
  Rng rng(3);
  Mlp net = make_mlp({5, 8, 4}, {Activation::kRelu}, Head::kSoftmax, rng);
  auto acts = mlp_forward(net, {0.1, 0.2, -0.4, 1.0, -2.0});
  double sum = 0.0;
  for (double v : acts.back()) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  auto p1 = softmax({1.0, 2.0, 3.0});
  auto p2 = softmax({101.0, 102.0, 103.0});
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-9));
}

TEST_CASE("forward: shape mismatch throws") {
  Rng rng(4);
  Mlp net = make_mlp({4, 2}, {}, Head::kLogistic, rng);
  CHECK_THROWS_AS(mlp_forward(net, {1.0, 2.0}), ShapeError);
}

TEST_CASE("backprop: gradients match central finite differences") {
  Rng rng(5);
  for (Head head : {Head::kLogistic, Head::kSoftmax}) {
    const std::size_t out_dim = head == Head::kLogistic ? 1 : 3;
    Mlp net = make_mlp({6, 5, 4, out_dim},
                       {Activation::kSigmoid, Activation::kRelu}, head, rng);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.normal();
    std::vector<double> y(out_dim, 0.0);
    y[0] = 1.0;

    MlpGradients grads = zero_gradients(net);
    mlp_backprop(net, x, y, &grads);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (std::size_t i = 0; i < net.layers[l].w.data().size(); ++i) {
        const double numeric =
            numeric_grad(net, x, y, &net.layers[l].w.data()[i]);
        const double analytic = grads.dw[l].data()[i];
        if (std::abs(numeric) > 1e-7 || std::abs(analytic) > 1e-7)
          CHECK(rel_err(numeric, analytic) < 1e-4);
      }
      for (std::size_t i = 0; i < net.layers[l].b.size(); ++i) {
        const double numeric = numeric_grad(net, x, y, &net.layers[l].b[i]);
        CHECK(rel_err(numeric, grads.db[l][i]) < 1e-4);
      }
    }
  }
}

TEST_CASE("backprop: saturated correct prediction has near-zero gradients") {
  Rng rng(6);
  Mlp net = make_mlp({2, 1}, {}, Head::kLogistic, rng);
  net.layers[0].w(0, 0) = 50.0;
  net.layers[0].w(0, 1) = 50.0;
  net.layers[0].b[0] = 0.0;
  MlpGradients grads = zero_gradients(net);
  mlp_backprop(net, {1.0, 1.0}, {1.0}, &grads);
  for (double v : grads.dw[0].data()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("backprop: accumulating twice doubles every gradient") {
  Rng rng(7);
  Mlp net = make_mlp({4, 3, 1}, {Activation::kRelu}, Head::kLogistic, rng);
  std::vector<double> x = {0.5, -0.2, 1.0, 0.1};
  MlpGradients once = zero_gradients(net);
  mlp_backprop(net, x, {1.0}, &once);
  MlpGradients twice = zero_gradients(net);
  mlp_backprop(net, x, {1.0}, &twice);
  mlp_backprop(net, x, {1.0}, &twice);
  for (std::size_t l = 0; l < once.dw.size(); ++l)
    for (std::size_t i = 0; i < once.dw[l].data().size(); ++i)
      CHECK(twice.dw[l].data()[i] ==
            doctest::Approx(2.0 * once.dw[l].data()[i]).epsilon(1e-12));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  AdamState st;
  st.lr = 0.1;
  std::vector<double> w = {1.0, -2.0};
  std::vector<double> g = {0.0, 0.0};
  adam_step(st, {&w}, {&g});
  CHECK(w[0] == 1.0);
  CHECK(w[1] == -2.0);
}

TEST_CASE("adam: hand-computed first step on f(w) = w^2") {
  AdamState st;
  st.lr = 0.1;
  std::vector<double> w = {1.0};
  std::vector<double> g = {2.0};  // df/dw at w = 1
  adam_step(st, {&w}, {&g});
  // Bias-corrected first step moves by lr * g/|g| = 0.1.
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adam: 200 steps shrink w^2 from 1 below 0.05") {
  AdamState st;
  st.lr = 0.1;
  std::vector<double> w = {1.0};
  for (int i = 0; i < 200; ++i) {
    std::vector<double> g = {2.0 * w[0]};
    adam_step(st, {&w}, {&g});
  }
  CHECK(std::abs(w[0]) < 0.05);
}

TEST_CASE("rbm: CD-1 learns correlated bits; zero lr is a no-op") {
  Rng rng(8);
  // Two perfectly correlated visible bits.
  Matrix batch(20, 2, 0.0);
  Rng data_rng(9);
  for (std::size_t i = 0; i < batch.rows(); ++i) {
    const double bit = data_rng.uniform() < 0.5 ? 0.0 : 1.0;
    batch(i, 0) = bit;
    batch(i, 1) = bit;
  }
  Rbm rbm = make_rbm(2, 4, rng);
  const Rbm before = rbm;
  Rng frozen(10);
  rbm_cd1(rbm, batch, 0.0, frozen);
  for (std::size_t i = 0; i < rbm.w.data().size(); ++i)
    CHECK(rbm.w.data()[i] == before.w.data()[i]);

  double first_err = 0.0, last_err = 0.0;
  for (int epoch = 0; epoch < 500; ++epoch) {
    const double err = rbm_cd1(rbm, batch, 0.05, rng);
    if (epoch == 0) first_err = err;
    last_err = err;
  }
  CHECK(last_err < first_err);

  auto h = rbm_hidden_probabilities(rbm, {1.0, 1.0});
  for (double v : h) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("init_mlp_from_rbms: construction and weight copying") {
  Rng rng(11);
  Rbm r1 = make_rbm(10, 8, rng);
  Mlp net = init_mlp_from_rbms({r1}, 1, rng);
  REQUIRE(net.layers.size() == 2);
  CHECK(net.layers[0].w.rows() == 8);
  CHECK(net.layers[0].w.cols() == 10);
  CHECK(net.layers[1].w.rows() == 1);
  CHECK(net.layers[0].act == Activation::kSigmoid);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 8; ++j) CHECK(net.layers[0].w(j, i) == r1.w(i, j));

  Rbm r2 = make_rbm(8, 4, rng);
  Mlp deep = init_mlp_from_rbms({r1, r2}, 1, rng);
  REQUIRE(deep.layers.size() == 3);
  CHECK(deep.layers[0].w.rows() == 8);
  CHECK(deep.layers[1].w.rows() == 4);
  CHECK(deep.layers[2].w.rows() == 1);

  Rbm mismatched = make_rbm(5, 4, rng);
  CHECK_THROWS_AS(init_mlp_from_rbms({r1, mismatched}, 1, rng), ShapeError);
}

TEST_CASE("svm: separable 1-D points classify correctly") {
  Matrix x(2, 1, 0.0);
  x(0, 0) = -1.0;
  x(1, 0) = 1.0;
  LinearSvm svm = svm_train(x, {0, 1}, 1.0);
  CHECK(svm_predict(svm, {-1.0}) == 0);
  CHECK(svm_predict(svm, {1.0}) == 1);
}

TEST_CASE("svm: objective within 2% of a brute-force grid search") {
  Matrix x(4, 2, 0.0);
  x(0, 0) = -1.0;
  x(0, 1) = -0.5;
  x(1, 0) = -0.7;
  x(1, 1) = 0.8;
  x(2, 0) = 0.9;
  x(2, 1) = -0.3;
  x(3, 0) = 1.1;
  x(3, 1) = 0.6;
  std::vector<int> y = {0, 0, 1, 1};

  SvmTrainConfig cfg;
  cfg.epochs = 3000;
  LinearSvm svm = svm_train(x, y, 1.0, cfg);
  const double trained = svm_objective(svm, x, y);

  double best = 1e300;
  for (double w0 = -3.0; w0 <= 3.0; w0 += 0.02) {
    for (double w1 = -3.0; w1 <= 3.0; w1 += 0.02) {
      for (double b = -2.0; b <= 2.0; b += 0.02) {
        LinearSvm probe;
        probe.w = {w0, w1};
        probe.b = b;
        probe.c = 1.0;
        best = std::min(best, svm_objective(probe, x, y));
      }
    }
  }
  CHECK(trained <= best * 1.02 + 1e-9);
}

TEST_CASE("svm: duplicating the training set leaves predictions unchanged") {
  Rng rng(13);
  Matrix x(20, 2, 0.0);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    const int label = i % 2;
    x(i, 0) = (label ? 1.0 : -1.0) + 0.3 * rng.normal();
    x(i, 1) = rng.normal();
    y[i] = label;
  }
  Matrix x2(40, 2, 0.0);
  std::vector<int> y2(40);
  for (std::size_t i = 0; i < 40; ++i) {
    std::copy(x.row(i % 20), x.row(i % 20) + 2, x2.row(i));
    y2[i] = y[i % 20];
  }
  LinearSvm a = svm_train(x, y, 1.0);
  LinearSvm b = svm_train(x2, y2, 1.0);
  for (std::size_t i = 0; i < 20; ++i) {
    std::vector<double> xi(x.row(i), x.row(i) + 2);
    CHECK(svm_predict(a, xi) == svm_predict(b, xi));
  }
}

TEST_CASE("svm: single-class data raises a degenerate-model error") {
  Matrix x(3, 1, 0.5);
  CHECK_THROWS_AS(svm_train(x, {1, 1, 1}, 1.0), DegenerateInputError);
}

TEST_CASE("conv2d: gradients match finite differences") {
  Rng rng(14);
  Tensor input({2, 5, 4});
  for (auto& v : input.data) v = rng.normal();
  Tensor kernel({3, 2, 3, 3});
  for (auto& v : kernel.data) v = 0.5 * rng.normal();
  std::vector<double> bias = {0.1, -0.2, 0.3};

  // Scalar loss: fixed random projection of the output.
  Tensor out = conv2d_forward(input, kernel, bias);
  std::vector<double> proj(out.size());
  for (auto& v : proj) v = rng.normal();
  auto loss = [&](const Tensor& in, const Tensor& k,
                  const std::vector<double>& b) {
    Tensor o = conv2d_forward(in, k, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) acc += proj[i] * o.data[i];
    return acc;
  };

  Tensor grad_out(out.shape);
  grad_out.data = proj;
  Tensor d_in, d_k;
  std::vector<double> d_b;
  conv2d_backward(input, kernel, grad_out, &d_in, &d_k, &d_b);

  const double h = 1e-5;
  for (std::size_t i = 0; i < input.size(); i += 3) {
    Tensor probe = input;
    probe.data[i] += h;
    const double lp = loss(probe, kernel, bias);
    probe.data[i] -= 2.0 * h;
    const double lm = loss(probe, kernel, bias);
    CHECK(rel_err((lp - lm) / (2.0 * h), d_in.data[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < kernel.size(); i += 5) {
    Tensor probe = kernel;
    probe.data[i] += h;
    const double lp = loss(input, probe, bias);
    probe.data[i] -= 2.0 * h;
    const double lm = loss(input, probe, bias);
    CHECK(rel_err((lp - lm) / (2.0 * h), d_k.data[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < bias.size(); ++i) {
    std::vector<double> probe = bias;
    probe[i] += h;
    const double lp = loss(input, kernel, probe);
    probe[i] -= 2.0 * h;
    const double lm = loss(input, kernel, probe);
    CHECK(rel_err((lp - lm) / (2.0 * h), d_b[i]) < 1e-4);
  }
}

TEST_CASE("maxpool: gradient routes only to argmax positions (4x4 brute force)") {
  Tensor input({1, 4, 4});
  // Distinct values; argmax of each 2x2 window is unambiguous.
  const double vals[16] = {1, 9, 2, 3, 4, 5, 6, 11, 13, 7, 8, 0, 10, 12, 15, 14};
  for (int i = 0; i < 16; ++i) input.data[static_cast<std::size_t>(i)] = vals[i];

  std::vector<std::size_t> argmax;
  Tensor out = maxpool2_forward(input, &argmax);
  REQUIRE(out.shape[1] == 2);
  REQUIRE(out.shape[2] == 2);
  CHECK(out.data[0] == 9);
  CHECK(out.data[1] == 11);
  CHECK(out.data[2] == 13);
  CHECK(out.data[3] == 15);

  Tensor grad_out(out.shape);
  for (auto& v : grad_out.data) v = 1.0;
  Tensor grad_in = maxpool2_backward(grad_out, input, argmax);
  // Brute force: exactly the four max positions receive gradient 1.
  for (int i = 0; i < 16; ++i) {
    const bool is_max = vals[i] == 9 || vals[i] == 11 || vals[i] == 13 ||
                        vals[i] == 15;
    CHECK(grad_in.data[static_cast<std::size_t>(i)] == (is_max ? 1.0 : 0.0));
  }
}

TEST_CASE("maxpool: dimensions below 2 pass through") {
  Tensor input({3, 1, 5});
  Rng rng(15);
  for (auto& v : input.data) v = rng.normal();
  Tensor out = maxpool2_forward(input, nullptr);
  CHECK(out.shape[1] == 1);
  CHECK(out.shape[2] == 2);
}

TEST_CASE("training loss is non-increasing over 25 ADAM epochs (20 seeds)") {
  int monotone = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 100);
    Mlp net = make_mlp({4, 8, 1}, {Activation::kSigmoid}, Head::kLogistic, rng);
    Matrix x(6, 4, 0.0);
    std::vector<double> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.uniform();
      y[i] = i % 2;
    }
    AdamState adam;
    adam.lr = 1e-3;
    bool ok = true;
    double prev = 1e300;
    for (int epoch = 0; epoch < 25; ++epoch) {
      MlpGradients grads = zero_gradients(net);
      double loss = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        std::vector<double> xi(x.row(i), x.row(i) + 4);
        loss += mlp_backprop(net, xi, {y[i]}, &grads);
      }
      if (loss > prev + 1e-12) ok = false;
      prev = loss;
      std::vector<std::vector<double>*> params;
      std::vector<const std::vector<double>*> gblocks;
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        params.push_back(&net.layers[l].w.data());
        params.push_back(&net.layers[l].b);
        gblocks.push_back(&grads.dw[l].data());
        gblocks.push_back(&grads.db[l]);
      }
      adam_step(adam, params, gblocks);
    }
    if (ok) ++monotone;
  }
  CHECK(monotone >= 19);  // >= 95% of 20 trials
}
