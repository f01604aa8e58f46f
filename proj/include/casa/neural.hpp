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

#ifndef CASA_NEURAL_HPP
#define CASA_NEURAL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "casa/common.hpp"

namespace casa {

// Row-major n-d value container shared by every learnable primitive.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    data.assign(n, 0.0);
  }

  std::size_t size() const { return data.size(); }
};

enum class Activation { kLinear, kRelu, kSigmoid };
enum class Head { kNone, kLogistic, kSoftmax };

double sigmoid(double x);
void relu_inplace(std::vector<double>& v);
std::vector<double> softmax(const std::vector<double>& logits);

// Multilayer perceptron. The final layer is affine; `head` squashes its
// output (logistic for binary mask units, softmax for classification).
struct Mlp {
  struct Layer {
    Matrix w;               // out x in
    std::vector<double> b;  // out
    Activation act = Activation::kLinear;
  };
  std::vector<Layer> layers;
  Head head = Head::kLogistic;

  std::size_t input_dim() const { return layers.front().w.cols(); }
  std::size_t output_dim() const { return layers.back().w.rows(); }
};

// Uniform +-sqrt(6 / (fan_in + fan_out)) initialization.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

Mlp make_mlp(const std::vector<std::size_t>& dims,
             const std::vector<Activation>& hidden_acts, Head head, Rng& rng);

// Forward pass retaining every layer's post-activation (activations[0] is
// the input, the last entry is the head output). Callers read the last
// hidden layer as the learned feature vector.
std::vector<std::vector<double>> mlp_forward(const Mlp& net,
                                             const std::vector<double>& x);

struct MlpGradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
};

// Backpropagation for binary (logistic head) or categorical (softmax head)
// cross-entropy. `target` is the per-output label vector. Returns the loss.
double mlp_backprop(const Mlp& net, const std::vector<double>& x,
                    const std::vector<double>& target, MlpGradients* grads);

void accumulate(MlpGradients& into, const MlpGradients& from);
void scale(MlpGradients& grads, double s);
MlpGradients zero_gradients(const Mlp& net);

// Bias-corrected ADAM over a list of parameter blocks.
struct AdamState {
  double lr = 4e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<std::vector<double>> m, v;
};

void adam_step(AdamState& state, const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads);

// Restricted Boltzmann machine with binary hidden units.
struct Rbm {
  Matrix w;                 // visible x hidden
  std::vector<double> b_v;  // visible
  std::vector<double> b_h;  // hidden

  std::size_t visible() const { return w.rows(); }
  std::size_t hidden() const { return w.cols(); }
};

Rbm make_rbm(std::size_t visible, std::size_t hidden, Rng& rng);

// One CD-1 update over a batch (rows = samples, values in [0,1]). Returns
// the mean squared reconstruction error before the update.
double rbm_cd1(Rbm& rbm, const Matrix& batch, double learning_rate, Rng& rng);

std::vector<double> rbm_hidden_probabilities(const Rbm& rbm,
                                             const std::vector<double>& visible);

// Builds an MLP whose hidden layers copy the RBM stack (sigmoid units, the
// pretraining-matched activation) and whose output head is a freshly
// initialized logistic layer.
Mlp init_mlp_from_rbms(const std::vector<Rbm>& stack, std::size_t output_dim,
                       Rng& rng);

// Linear SVM trained by deterministic averaged subgradient descent on
// 0.5 ||w||^2 + C * mean(hinge); mean keeps duplication of the training set
// from moving the optimum.
struct LinearSvm {
  std::vector<double> w;
  double b = 0.0;
  double c = 1.0;
};

struct SvmTrainConfig {
  int epochs = 500;
  double eta0 = 0.5;
  double decay = 0.02;
};

LinearSvm svm_train(const Matrix& samples, const std::vector<int>& labels, double c,
                    const SvmTrainConfig& cfg = {});
int svm_predict(const LinearSvm& svm, const std::vector<double>& x);
double svm_decision(const LinearSvm& svm, const std::vector<double>& x);
double svm_objective(const LinearSvm& svm, const Matrix& samples,
                     const std::vector<int>& labels);

// --- 2-D convolution primitives (NCHW single sample) -----------------------

// 3x3 same-padding convolution: input [c_in, h, w], kernel
// [c_out, c_in, 3, 3], bias [c_out] -> [c_out, h, w].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel,
                      const std::vector<double>& bias);
void conv2d_backward(const Tensor& input, const Tensor& kernel,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_kernel, std::vector<double>* grad_bias);

// 2x2 stride-2 max pooling; dimensions below 2 pass through unpooled.
Tensor maxpool2_forward(const Tensor& input, std::vector<std::size_t>* argmax);
Tensor maxpool2_backward(const Tensor& grad_out, const Tensor& input,
                         const std::vector<std::size_t>& argmax);

double binary_cross_entropy(double p, double y);
double categorical_cross_entropy(const std::vector<double>& probs, std::size_t label);

}  // namespace casa

#endif  // CASA_NEURAL_HPP
