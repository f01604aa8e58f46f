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

#include "casa/neural.hpp"

#include <algorithm>
#include <cmath>

namespace casa {

namespace {

constexpr double kProbClamp = 1e-12;

std::vector<double> affine(const Matrix& w, const std::vector<double>& b,
                           const std::vector<double>& x) {
  if (x.size() != w.cols()) throw ShapeError("mlp: input dimension mismatch");
  std::vector<double> out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double acc = b[i];
    const double* row = w.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

void apply_activation(std::vector<double>& v, Activation act) {
  switch (act) {
    case Activation::kLinear:
      break;
    case Activation::kRelu:
      relu_inplace(v);
      break;
    case Activation::kSigmoid:
      for (auto& x : v) x = sigmoid(x);
      break;
  }
}

// Derivative w.r.t. the pre-activation given the post-activation value.
double activation_grad_from_post(double post, Activation act) {
  switch (act) {
    case Activation::kLinear: return 1.0;
    case Activation::kRelu: return post > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: return post * (1.0 - post);
  }
  return 1.0;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void relu_inplace(std::vector<double>& v) {
  for (auto& x : v)
    if (x < 0.0) x = 0.0;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix w(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

Mlp make_mlp(const std::vector<std::size_t>& dims,
             const std::vector<Activation>& hidden_acts, Head head, Rng& rng) {
  if (dims.size() < 2) throw ShapeError("make_mlp: need at least input and output");
  if (hidden_acts.size() + 2 != dims.size())
    throw ShapeError("make_mlp: one activation per hidden layer required");
  Mlp net;
  net.head = head;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Mlp::Layer layer;
    layer.w = glorot_uniform(dims[l + 1], dims[l], rng);
    layer.b.assign(dims[l + 1], 0.0);
    layer.act = l + 2 == dims.size() ? Activation::kLinear : hidden_acts[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<std::vector<double>> mlp_forward(const Mlp& net,
                                             const std::vector<double>& x) {
  std::vector<std::vector<double>> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto z = affine(net.layers[l].w, net.layers[l].b, acts.back());
    apply_activation(z, net.layers[l].act);
    acts.push_back(std::move(z));
  }
  auto& out = acts.back();
  switch (net.head) {
    case Head::kNone:
      break;
    case Head::kLogistic:
      for (auto& v : out) v = sigmoid(v);
      break;
    case Head::kSoftmax:
      out = softmax(out);
      break;
  }
  return acts;
}

MlpGradients zero_gradients(const Mlp& net) {
  MlpGradients g;
  for (const auto& layer : net.layers) {
    g.dw.emplace_back(layer.w.rows(), layer.w.cols(), 0.0);
    g.db.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

void accumulate(MlpGradients& into, const MlpGradients& from) {
  for (std::size_t l = 0; l < into.dw.size(); ++l) {
    for (std::size_t i = 0; i < into.dw[l].data().size(); ++i)
      into.dw[l].data()[i] += from.dw[l].data()[i];
    for (std::size_t i = 0; i < into.db[l].size(); ++i)
      into.db[l][i] += from.db[l][i];
  }
}

void scale(MlpGradients& grads, double s) {
  for (auto& m : grads.dw)
    for (auto& v : m.data()) v *= s;
  for (auto& b : grads.db)
    for (auto& v : b) v *= s;
}

double mlp_backprop(const Mlp& net, const std::vector<double>& x,
                    const std::vector<double>& target, MlpGradients* grads) {
  if (net.head == Head::kNone)
    throw StateError("mlp_backprop: requires a logistic or softmax head");

  // Forward with caches of pre-head linear output.
  std::vector<std::vector<double>> acts;
  acts.push_back(x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto z = affine(net.layers[l].w, net.layers[l].b, acts.back());
    apply_activation(z, net.layers[l].act);
    acts.push_back(std::move(z));
  }
  std::vector<double> probs = acts.back();
  if (net.head == Head::kLogistic) {
    for (auto& v : probs) v = sigmoid(v);
  } else {
    probs = softmax(probs);
  }
  if (target.size() != probs.size())
    throw ShapeError("mlp_backprop: target dimension mismatch");

  double loss = 0.0;
  if (net.head == Head::kLogistic) {
    for (std::size_t i = 0; i < probs.size(); ++i)
      loss += binary_cross_entropy(probs[i], target[i]);
  } else {
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (target[i] > 0.0)
        loss -= target[i] * std::log(std::max(probs[i], kProbClamp));
  }

  // Cross-entropy through either head gives delta = p - y on the logits.
  std::vector<double> delta(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) delta[i] = probs[i] - target[i];

  if (grads) {
    for (std::size_t li = net.layers.size(); li-- > 0;) {
      const auto& layer = net.layers[li];
      const auto& input = acts[li];
      auto& dw = grads->dw[li];
      auto& db = grads->db[li];
      for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        db[i] += delta[i];
        double* dwrow = dw.row(i);
        for (std::size_t j = 0; j < layer.w.cols(); ++j)
          dwrow[j] += delta[i] * input[j];
      }
      if (li == 0) break;
      std::vector<double> next(layer.w.cols(), 0.0);
      for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        const double* row = layer.w.row(i);
        const double d = delta[i];
        for (std::size_t j = 0; j < layer.w.cols(); ++j) next[j] += row[j] * d;
      }
      const auto& post = acts[li];
      for (std::size_t j = 0; j < next.size(); ++j)
        next[j] *= activation_grad_from_post(post[j], net.layers[li - 1].act);
      delta = std::move(next);
    }
  }
  return loss;
}

void adam_step(AdamState& state, const std::vector<std::vector<double>*>& params,
               const std::vector<const std::vector<double>*>& grads) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->size(), 0.0);
      state.v[i].assign(params[i]->size(), 0.0);
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    const auto& g = *grads[i];
    if (p.size() != g.size() || p.size() != state.m[i].size())
      throw ShapeError("adam_step: block size mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      state.m[i][j] = state.beta1 * state.m[i][j] + (1.0 - state.beta1) * g[j];
      state.v[i][j] = state.beta2 * state.v[i][j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = state.m[i][j] / bc1;
      const double vhat = state.v[i][j] / bc2;
      p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

Rbm make_rbm(std::size_t visible, std::size_t hidden, Rng& rng) {
  Rbm rbm;
  rbm.w = Matrix(visible, hidden);
  for (auto& v : rbm.w.data()) v = 0.01 * rng.normal();
  rbm.b_v.assign(visible, 0.0);
  rbm.b_h.assign(hidden, 0.0);
  return rbm;
}

std::vector<double> rbm_hidden_probabilities(const Rbm& rbm,
                                             const std::vector<double>& visible) {
  if (visible.size() != rbm.visible()) throw ShapeError("rbm: visible dim mismatch");
  std::vector<double> h(rbm.hidden());
  for (std::size_t j = 0; j < rbm.hidden(); ++j) {
    double acc = rbm.b_h[j];
    for (std::size_t i = 0; i < rbm.visible(); ++i) acc += visible[i] * rbm.w(i, j);
    h[j] = sigmoid(acc);
  }
  return h;
}

double rbm_cd1(Rbm& rbm, const Matrix& batch, double learning_rate, Rng& rng) {
  const std::size_t n = batch.rows();
  if (n == 0) throw DegenerateInputError("rbm_cd1: empty batch");
  if (batch.cols() != rbm.visible()) throw ShapeError("rbm_cd1: visible dim mismatch");

  const std::size_t nv = rbm.visible(), nh = rbm.hidden();
  Matrix h0(n, nh), v1(n, nv), h1(n, nh);
  double recon_err = 0.0;

  for (std::size_t s = 0; s < n; ++s) {
    // Up.
    for (std::size_t j = 0; j < nh; ++j) {
      double acc = rbm.b_h[j];
      for (std::size_t i = 0; i < nv; ++i) acc += batch(s, i) * rbm.w(i, j);
      h0(s, j) = sigmoid(acc);
    }
    // Sample hidden, go down.
    std::vector<double> h_sample(nh);
    for (std::size_t j = 0; j < nh; ++j)
      h_sample[j] = rng.uniform() < h0(s, j) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      double acc = rbm.b_v[i];
      for (std::size_t j = 0; j < nh; ++j) acc += h_sample[j] * rbm.w(i, j);
      v1(s, i) = sigmoid(acc);
      const double diff = v1(s, i) - batch(s, i);
      recon_err += diff * diff;
    }
    // Up again from the reconstruction probabilities.
    for (std::size_t j = 0; j < nh; ++j) {
      double acc = rbm.b_h[j];
      for (std::size_t i = 0; i < nv; ++i) acc += v1(s, i) * rbm.w(i, j);
      h1(s, j) = sigmoid(acc);
    }
  }

  const double scale = learning_rate / static_cast<double>(n);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nh; ++j) {
      double pos = 0.0, neg = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        pos += batch(s, i) * h0(s, j);
        neg += v1(s, i) * h1(s, j);
      }
      rbm.w(i, j) += scale * (pos - neg);
    }
  }
  for (std::size_t i = 0; i < nv; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) acc += batch(s, i) - v1(s, i);
    rbm.b_v[i] += scale * acc;
  }
  for (std::size_t j = 0; j < nh; ++j) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) acc += h0(s, j) - h1(s, j);
    rbm.b_h[j] += scale * acc;
  }
  return recon_err / static_cast<double>(n * nv);
}

Mlp init_mlp_from_rbms(const std::vector<Rbm>& stack, std::size_t output_dim,
                       Rng& rng) {
  if (stack.empty()) throw ShapeError("init_mlp_from_rbms: empty stack");
  for (std::size_t i = 1; i < stack.size(); ++i)
    if (stack[i].visible() != stack[i - 1].hidden())
      throw ShapeError("init_mlp_from_rbms: RBM dimensions do not chain");

  Mlp net;
  net.head = Head::kLogistic;
  for (const auto& rbm : stack) {
    Mlp::Layer layer;
    layer.w = Matrix(rbm.hidden(), rbm.visible());
    for (std::size_t i = 0; i < rbm.visible(); ++i)
      for (std::size_t j = 0; j < rbm.hidden(); ++j) layer.w(j, i) = rbm.w(i, j);
    layer.b = rbm.b_h;
    layer.act = Activation::kSigmoid;
    net.layers.push_back(std::move(layer));
  }
  Mlp::Layer out;
  out.w = glorot_uniform(output_dim, stack.back().hidden(), rng);
  out.b.assign(output_dim, 0.0);
  out.act = Activation::kLinear;
  net.layers.push_back(std::move(out));
  return net;
}

double svm_decision(const LinearSvm& svm, const std::vector<double>& x) {
  if (x.size() != svm.w.size()) throw ShapeError("svm: dimension mismatch");
  double acc = svm.b;
  for (std::size_t i = 0; i < x.size(); ++i) acc += svm.w[i] * x[i];
  return acc;
}

int svm_predict(const LinearSvm& svm, const std::vector<double>& x) {
  return svm_decision(svm, x) >= 0.0 ? 1 : 0;
}

double svm_objective(const LinearSvm& svm, const Matrix& samples,
                     const std::vector<int>& labels) {
  double reg = 0.0;
  for (double v : svm.w) reg += v * v;
  reg *= 0.5;
  double hinge = 0.0;
  for (std::size_t s = 0; s < samples.rows(); ++s) {
    const double y = labels[s] == 1 ? 1.0 : -1.0;
    double f = svm.b;
    const double* row = samples.row(s);
    for (std::size_t j = 0; j < samples.cols(); ++j) f += svm.w[j] * row[j];
    hinge += std::max(0.0, 1.0 - y * f);
  }
  return reg + svm.c * hinge / static_cast<double>(samples.rows());
}

LinearSvm svm_train(const Matrix& samples, const std::vector<int>& labels, double c,
                    const SvmTrainConfig& cfg) {
  if (samples.rows() != labels.size())
    throw ShapeError("svm_train: label count mismatch");
  if (samples.rows() == 0) throw DegenerateInputError("svm_train: no samples");
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DegenerateInputError("svm_train: need both classes present");

  const std::size_t n = samples.rows(), d = samples.cols();
  LinearSvm svm;
  svm.w.assign(d, 0.0);
  svm.b = 0.0;
  svm.c = c;

  std::vector<double> w_avg(d, 0.0);
  double b_avg = 0.0;
  std::size_t n_avg = 0;
  const int avg_from = cfg.epochs / 2;

  std::vector<double> grad(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t j = 0; j < d; ++j) grad[j] = svm.w[j];
    double grad_b = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double y = labels[s] == 1 ? 1.0 : -1.0;
      double f = svm.b;
      const double* row = samples.row(s);
      for (std::size_t j = 0; j < d; ++j) f += svm.w[j] * row[j];
      if (y * f < 1.0) {
        const double g = c * y / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) grad[j] -= g * row[j];
        grad_b -= g;
      }
    }
    const double eta = cfg.eta0 / (1.0 + cfg.decay * epoch);
    for (std::size_t j = 0; j < d; ++j) svm.w[j] -= eta * grad[j];
    svm.b -= eta * grad_b;
    if (epoch >= avg_from) {
      for (std::size_t j = 0; j < d; ++j) w_avg[j] += svm.w[j];
      b_avg += svm.b;
      ++n_avg;
    }
  }
  if (n_avg > 0) {
    for (std::size_t j = 0; j < d; ++j) svm.w[j] = w_avg[j] / n_avg;
    svm.b = b_avg / n_avg;
  }
  return svm;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel,
                      const std::vector<double>& bias) {
  if (input.shape.size() != 3 || kernel.shape.size() != 4)
    throw ShapeError("conv2d: expected [c,h,w] input and [o,c,3,3] kernel");
  const std::size_t c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
  const std::size_t c_out = kernel.shape[0];
  if (kernel.shape[1] != c_in || kernel.shape[2] != 3 || kernel.shape[3] != 3)
    throw ShapeError("conv2d: kernel shape mismatch");
  if (bias.size() != c_out) throw ShapeError("conv2d: bias size mismatch");

  Tensor out({c_out, h, w});
  for (std::size_t co = 0; co < c_out; ++co) {
    double* out_plane = out.data.data() + co * h * w;
    for (std::size_t i = 0; i < h * w; ++i) out_plane[i] = bias[co];
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* in_plane = input.data.data() + ci * h * w;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double kval =
              kernel.data[((co * c_in + ci) * 3 + static_cast<std::size_t>(ky)) * 3 +
                          static_cast<std::size_t>(kx)];
          if (kval == 0.0) continue;
          const int dy = ky - 1, dx = kx - 1;
          const std::size_t y_lo = dy < 0 ? 1 : 0;
          const std::size_t y_hi = dy > 0 ? h - 1 : h;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            const double* src = in_plane + (y + static_cast<std::size_t>(dy)) * w;
            double* dst = out_plane + y * w;
            const std::size_t x_lo = dx < 0 ? 1 : 0;
            const std::size_t x_hi = dx > 0 ? w - 1 : w;
            for (std::size_t x = x_lo; x < x_hi; ++x)
              dst[x] += kval * src[x + static_cast<std::size_t>(dx)];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernel,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_kernel, std::vector<double>* grad_bias) {
  const std::size_t c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
  const std::size_t c_out = kernel.shape[0];

  if (grad_input) *grad_input = Tensor(input.shape);
  if (grad_kernel) *grad_kernel = Tensor(kernel.shape);
  if (grad_bias) grad_bias->assign(c_out, 0.0);

  for (std::size_t co = 0; co < c_out; ++co) {
    const double* go_plane = grad_out.data.data() + co * h * w;
    if (grad_bias) {
      double acc = 0.0;
      for (std::size_t i = 0; i < h * w; ++i) acc += go_plane[i];
      (*grad_bias)[co] += acc;
    }
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* in_plane = input.data.data() + ci * h * w;
      double* gi_plane =
          grad_input ? grad_input->data.data() + ci * h * w : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const std::size_t kidx =
              ((co * c_in + ci) * 3 + static_cast<std::size_t>(ky)) * 3 +
              static_cast<std::size_t>(kx);
          const double kval = kernel.data[kidx];
          const int dy = ky - 1, dx = kx - 1;
          const std::size_t y_lo = dy < 0 ? 1 : 0;
          const std::size_t y_hi = dy > 0 ? h - 1 : h;
          double kacc = 0.0;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            const double* src = in_plane + (y + static_cast<std::size_t>(dy)) * w;
            const double* go = go_plane + y * w;
            double* gi = gi_plane
                             ? gi_plane + (y + static_cast<std::size_t>(dy)) * w
                             : nullptr;
            const std::size_t x_lo = dx < 0 ? 1 : 0;
            const std::size_t x_hi = dx > 0 ? w - 1 : w;
            for (std::size_t x = x_lo; x < x_hi; ++x) {
              kacc += src[x + static_cast<std::size_t>(dx)] * go[x];
              if (gi) gi[x + static_cast<std::size_t>(dx)] += kval * go[x];
            }
          }
          if (grad_kernel) grad_kernel->data[kidx] += kacc;
        }
      }
    }
  }
}

Tensor maxpool2_forward(const Tensor& input, std::vector<std::size_t>* argmax) {
  if (input.shape.size() != 3) throw ShapeError("maxpool2: expected [c,h,w]");
  const std::size_t c = input.shape[0], h = input.shape[1], w = input.shape[2];
  const std::size_t ph = h >= 2 ? h / 2 : 1;
  const std::size_t pw = w >= 2 ? w / 2 : 1;
  const std::size_t sy = h >= 2 ? 2 : 1;
  const std::size_t sx = w >= 2 ? 2 : 1;

  Tensor out({c, ph, pw});
  if (argmax) argmax->assign(out.size(), 0);
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t y = 0; y < ph; ++y) {
      for (std::size_t x = 0; x < pw; ++x) {
        double best = -1e300;
        std::size_t best_idx = 0;
        for (std::size_t yy = 0; yy < sy; ++yy) {
          for (std::size_t xx = 0; xx < sx; ++xx) {
            const std::size_t idx = (ci * h + y * sy + yy) * w + x * sx + xx;
            if (input.data[idx] > best) {
              best = input.data[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t out_idx = (ci * ph + y) * pw + x;
        out.data[out_idx] = best;
        if (argmax) (*argmax)[out_idx] = best_idx;
      }
    }
  }
  return out;
}

Tensor maxpool2_backward(const Tensor& grad_out, const Tensor& input,
                         const std::vector<std::size_t>& argmax) {
  Tensor grad_in(input.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i)
    grad_in.data[argmax[i]] += grad_out.data[i];
  return grad_in;
}

double binary_cross_entropy(double p, double y) {
  const double pc = std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
  return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

double categorical_cross_entropy(const std::vector<double>& probs,
                                 std::size_t label) {
  return -std::log(std::max(probs[label], kProbClamp));
}

}  // namespace casa
