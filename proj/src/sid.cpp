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

#include "casa/sid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace casa {

namespace {

struct VggCache {
  std::vector<Tensor> conv_inputs;   // input to conv layer i
  std::vector<Tensor> conv_outputs;  // post-ReLU output of conv layer i
  std::vector<Tensor> pool_inputs;   // input to pool of block b
  std::vector<std::vector<std::size_t>> pool_argmax;
  std::vector<Tensor> pool_outputs;
  std::vector<double> flat;
  std::vector<double> fc1_post;
  std::vector<double> probs;
};

std::vector<double> fc_forward(const Matrix& w, const std::vector<double>& b,
                               const std::vector<double>& x) {
  std::vector<double> out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double acc = b[i];
    const double* row = w.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> vgg_forward_cached(const SpeechVggNet& net, const Tensor& input,
                                       VggCache* cache) {
  if (input.shape.size() != 3 || input.shape[0] != 1 ||
      input.shape[1] != net.input_h || input.shape[2] != net.input_w)
    throw ShapeError("vgg: input shape mismatch");

  Tensor x = input;
  std::size_t conv_idx = 0;
  for (std::size_t b = 0; b < net.n_blocks(); ++b) {
    for (int ci = 0; ci < net.cfg.convs_per_block; ++ci, ++conv_idx) {
      if (cache) cache->conv_inputs.push_back(x);
      Tensor y = conv2d_forward(x, net.kernels[conv_idx], net.biases[conv_idx]);
      relu_inplace(y.data);
      if (cache) cache->conv_outputs.push_back(y);
      x = std::move(y);
    }
    std::vector<std::size_t> argmax;
    if (cache) cache->pool_inputs.push_back(x);
    Tensor pooled = maxpool2_forward(x, &argmax);
    if (cache) {
      cache->pool_argmax.push_back(std::move(argmax));
      cache->pool_outputs.push_back(pooled);
    }
    x = std::move(pooled);
  }

  std::vector<double> flat = x.data;
  auto h1 = fc_forward(net.fc1_w, net.fc1_b, flat);
  relu_inplace(h1);
  auto logits = fc_forward(net.fc2_w, net.fc2_b, h1);
  auto probs = softmax(logits);
  if (cache) {
    cache->flat = std::move(flat);
    cache->fc1_post = std::move(h1);
    cache->probs = probs;
  }
  return probs;
}

}  // namespace

SpeechVggConfig paper_scale_vgg() {
  SpeechVggConfig cfg;
  cfg.widths = {64, 128, 256, 512, 512};
  cfg.convs_per_block = 2;
  cfg.fc_dim = 4096;
  return cfg;
}

std::pair<std::size_t, std::size_t> pooled_dims(std::size_t h, std::size_t w,
                                                std::size_t blocks) {
  for (std::size_t b = 0; b < blocks; ++b) {
    if (h >= 2) h /= 2;
    if (w >= 2) w /= 2;
  }
  return {h, w};
}

SpeechVggNet make_speech_vgg(const SpeechVggConfig& cfg, std::size_t n_speakers,
                             std::size_t input_h, std::size_t input_w, Rng& rng) {
  if (n_speakers < 2)
    throw DegenerateInputError("speech_vgg: need at least 2 speakers");
  SpeechVggNet net;
  net.cfg = cfg;
  net.n_speakers = n_speakers;
  net.input_h = input_h;
  net.input_w = input_w;

  // He (fan-in) initialization: the Glorot bound shrinks activations through
  // deep ReLU stacks and stalls training on this depth.
  std::size_t c_in = 1;
  for (std::size_t b = 0; b < cfg.widths.size(); ++b) {
    for (int ci = 0; ci < cfg.convs_per_block; ++ci) {
      const std::size_t c_out = cfg.widths[b];
      Tensor k({c_out, c_in, 3, 3});
      const double bound = std::sqrt(6.0 / static_cast<double>(9 * c_in));
      for (auto& v : k.data) v = rng.uniform(-bound, bound);
      net.kernels.push_back(std::move(k));
      net.biases.emplace_back(c_out, 0.0);
      c_in = c_out;
    }
  }
  const auto [ph, pw] = pooled_dims(input_h, input_w, cfg.widths.size());
  const std::size_t flat_dim = cfg.widths.back() * ph * pw;
  net.fc1_w = Matrix(cfg.fc_dim, flat_dim);
  {
    const double bound = std::sqrt(6.0 / static_cast<double>(flat_dim));
    for (auto& v : net.fc1_w.data()) v = rng.uniform(-bound, bound);
  }
  net.fc1_b.assign(cfg.fc_dim, 0.0);
  net.fc2_w = glorot_uniform(n_speakers, cfg.fc_dim, rng);
  net.fc2_b.assign(n_speakers, 0.0);
  return net;
}

Spectrogram prepare_input(const AudioSignal& sig, double pad_ms) {
  if (sig.samples.empty()) throw DegenerateInputError("prepare_input: empty signal");
  const std::size_t target = static_cast<std::size_t>(
      std::llround(pad_ms / 1000.0 * sig.sample_rate));
  if (sig.samples.size() > target)
    throw ValidationError("prepare_input: signal longer than pad window");
  AudioSignal padded = sig;
  padded.samples.resize(target, 0.0);
  return spectrogram(padded);
}

std::vector<Spectrogram> prepare_windows(const AudioSignal& sig, double pad_ms) {
  if (sig.samples.empty())
    throw DegenerateInputError("prepare_windows: empty signal");
  const std::size_t target = static_cast<std::size_t>(
      std::llround(pad_ms / 1000.0 * sig.sample_rate));
  std::vector<Spectrogram> out;
  for (std::size_t start = 0; start < sig.samples.size(); start += target) {
    AudioSignal window;
    window.sample_rate = sig.sample_rate;
    const std::size_t stop = std::min(sig.samples.size(), start + target);
    window.samples.assign(sig.samples.begin() + static_cast<std::ptrdiff_t>(start),
                          sig.samples.begin() + static_cast<std::ptrdiff_t>(stop));
    out.push_back(prepare_input(window, pad_ms));
  }
  return out;
}

Tensor spectrogram_to_input(const Spectrogram& spec) {
  // Dynamic-range clamp at 80 dB below the per-image peak, then mean/var
  // normalization. Referencing the peak (not the absolute log floor) is what
  // cancels global waveform gain: a gain shifts every above-floor bin and
  // the peak equally, and everything near the floor lands on the clamp.
  const Matrix& m = spec.log_magnitudes;
  Tensor t({1, m.rows(), m.cols()});
  double peak = m.data()[0];
  for (double v : m.data()) peak = std::max(peak, v);
  const double clamp_at = peak - 8.0;  // 80 dB of magnitude range
  for (std::size_t i = 0; i < m.data().size(); ++i)
    t.data[i] = std::max(m.data()[i], clamp_at) - peak;
  double mean = 0.0;
  for (double v : t.data) mean += v;
  mean /= static_cast<double>(t.data.size());
  double var = 0.0;
  for (double v : t.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t.data.size());
  const double sd = std::sqrt(std::max(var, 1e-12));
  for (auto& v : t.data) v = (v - mean) / sd;
  return t;
}

std::vector<double> vgg_forward(const SpeechVggNet& net, const Tensor& input) {
  return vgg_forward_cached(net, input, nullptr);
}

VggGradients zero_vgg_gradients(const SpeechVggNet& net) {
  VggGradients g;
  for (const auto& k : net.kernels) g.kernels.emplace_back(k.shape);
  for (const auto& b : net.biases) g.biases.emplace_back(b.size(), 0.0);
  g.fc1_w = Matrix(net.fc1_w.rows(), net.fc1_w.cols(), 0.0);
  g.fc1_b.assign(net.fc1_b.size(), 0.0);
  g.fc2_w = Matrix(net.fc2_w.rows(), net.fc2_w.cols(), 0.0);
  g.fc2_b.assign(net.fc2_b.size(), 0.0);
  return g;
}

void accumulate(VggGradients& into, const VggGradients& from) {
  for (std::size_t i = 0; i < into.kernels.size(); ++i)
    for (std::size_t j = 0; j < into.kernels[i].data.size(); ++j)
      into.kernels[i].data[j] += from.kernels[i].data[j];
  for (std::size_t i = 0; i < into.biases.size(); ++i)
    for (std::size_t j = 0; j < into.biases[i].size(); ++j)
      into.biases[i][j] += from.biases[i][j];
  for (std::size_t j = 0; j < into.fc1_w.data().size(); ++j)
    into.fc1_w.data()[j] += from.fc1_w.data()[j];
  for (std::size_t j = 0; j < into.fc1_b.size(); ++j)
    into.fc1_b[j] += from.fc1_b[j];
  for (std::size_t j = 0; j < into.fc2_w.data().size(); ++j)
    into.fc2_w.data()[j] += from.fc2_w.data()[j];
  for (std::size_t j = 0; j < into.fc2_b.size(); ++j)
    into.fc2_b[j] += from.fc2_b[j];
}

double vgg_backprop(const SpeechVggNet& net, const Tensor& input,
                    std::size_t label, VggGradients* grads,
                    std::vector<double>* probs_out) {
  VggCache cache;
  auto probs = vgg_forward_cached(net, input, &cache);
  const double loss = categorical_cross_entropy(probs, label);
  if (probs_out) *probs_out = probs;
  if (!grads) return loss;

  // Softmax + cross-entropy: delta on logits.
  std::vector<double> delta = probs;
  delta[label] -= 1.0;

  // fc2.
  for (std::size_t i = 0; i < net.fc2_w.rows(); ++i) {
    grads->fc2_b[i] += delta[i];
    double* row = grads->fc2_w.row(i);
    for (std::size_t j = 0; j < net.fc2_w.cols(); ++j)
      row[j] += delta[i] * cache.fc1_post[j];
  }
  std::vector<double> d_h1(net.fc1_w.rows(), 0.0);
  for (std::size_t i = 0; i < net.fc2_w.rows(); ++i) {
    const double* row = net.fc2_w.row(i);
    for (std::size_t j = 0; j < net.fc2_w.cols(); ++j) d_h1[j] += row[j] * delta[i];
  }
  for (std::size_t j = 0; j < d_h1.size(); ++j)
    if (cache.fc1_post[j] <= 0.0) d_h1[j] = 0.0;

  // fc1.
  for (std::size_t i = 0; i < net.fc1_w.rows(); ++i) {
    grads->fc1_b[i] += d_h1[i];
    double* row = grads->fc1_w.row(i);
    for (std::size_t j = 0; j < net.fc1_w.cols(); ++j)
      row[j] += d_h1[i] * cache.flat[j];
  }
  std::vector<double> d_flat(net.fc1_w.cols(), 0.0);
  for (std::size_t i = 0; i < net.fc1_w.rows(); ++i) {
    const double* row = net.fc1_w.row(i);
    for (std::size_t j = 0; j < net.fc1_w.cols(); ++j)
      d_flat[j] += row[j] * d_h1[i];
  }

  // Back through the blocks.
  Tensor d_x(cache.pool_outputs.back().shape);
  d_x.data = d_flat;
  std::size_t conv_idx = net.kernels.size();
  for (std::size_t b = net.n_blocks(); b-- > 0;) {
    d_x = maxpool2_backward(d_x, cache.pool_inputs[b], cache.pool_argmax[b]);
    for (int ci = net.cfg.convs_per_block; ci-- > 0;) {
      --conv_idx;
      const auto& post = cache.conv_outputs[conv_idx];
      for (std::size_t i = 0; i < d_x.data.size(); ++i)
        if (post.data[i] <= 0.0) d_x.data[i] = 0.0;
      Tensor d_in;
      conv2d_backward(cache.conv_inputs[conv_idx], net.kernels[conv_idx], d_x,
                      conv_idx > 0 ? &d_in : nullptr, &grads->kernels[conv_idx],
                      &grads->biases[conv_idx]);
      if (conv_idx > 0) d_x = std::move(d_in);
    }
  }
  return loss;
}

AudioSignal segregate(const MaskModel& model, const AudioSignal& mixture) {
  const WptTree tree = build_tree();
  SubbandSet sub = analyze(mixture, tree);
  Cochleagram coch = cochleagram(sub);
  TFMask mask = estimate_mask(model, mixture);
  return apply_mask_and_resynthesize(coch, mask, tree);
}

SidTrainResult train_sid(const std::vector<SidSample>& corpus,
                         const TrainConfig& cfg, const MaskModel* segregator) {
  if (corpus.empty()) throw DegenerateInputError("train_sid: empty corpus");
  int max_speaker = 0;
  for (const auto& s : corpus) max_speaker = std::max(max_speaker, s.speaker);
  const std::size_t n_speakers = static_cast<std::size_t>(max_speaker) + 1;
  if (n_speakers < 2)
    throw DegenerateInputError("train_sid: need at least 2 speakers");

  // Front end once per utterance; every window becomes a sample.
  std::vector<Tensor> inputs;
  std::vector<std::size_t> targets;
  for (const auto& sample : corpus) {
    AudioSignal sig = sample.signal;
    if (segregator) sig = segregate(*segregator, sig);
    for (const auto& spec : prepare_windows(sig, cfg.pad_ms)) {
      inputs.push_back(spectrogram_to_input(spec));
      targets.push_back(static_cast<std::size_t>(sample.speaker));
    }
  }

  Rng rng(cfg.seed);
  SidTrainResult result;
  result.net = make_speech_vgg(cfg.net, n_speakers, inputs[0].shape[1],
                               inputs[0].shape[2], rng);
  SpeechVggNet& net = result.net;

  AdamState adam;
  adam.lr = cfg.lr;

  const std::size_t n = inputs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  auto collect_params = [&](VggGradients& g, std::vector<std::vector<double>*>& p,
                            std::vector<const std::vector<double>*>& gb) {
    for (std::size_t i = 0; i < net.kernels.size(); ++i) {
      p.push_back(&net.kernels[i].data);
      gb.push_back(&g.kernels[i].data);
      p.push_back(&net.biases[i]);
      gb.push_back(&g.biases[i]);
    }
    p.push_back(&net.fc1_w.data());
    gb.push_back(&g.fc1_w.data());
    p.push_back(&net.fc1_b);
    gb.push_back(&g.fc1_b);
    p.push_back(&net.fc2_w.data());
    gb.push_back(&g.fc2_w.data());
    p.push_back(&net.fc2_b);
    gb.push_back(&g.fc2_b);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t stop = std::min(n, start + cfg.batch);
      const std::size_t bsize = stop - start;

      // Per-sample gradients computed in parallel, reduced in index order so
      // results do not depend on scheduling.
      std::vector<VggGradients> partial(bsize);
      std::vector<double> losses(bsize, 0.0);
      std::vector<std::size_t> hits(bsize, 0);
      parallel_for(bsize, [&](std::size_t i) {
        partial[i] = zero_vgg_gradients(net);
        const std::size_t idx = order[start + i];
        std::vector<double> probs;
        losses[i] = vgg_backprop(net, inputs[idx], targets[idx], &partial[i], &probs);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < probs.size(); ++k)
          if (probs[k] > probs[arg]) arg = k;
        hits[i] = arg == targets[idx] ? 1 : 0;
      });
      VggGradients grads = zero_vgg_gradients(net);
      for (std::size_t i = 0; i < bsize; ++i) {
        accumulate(grads, partial[i]);
        epoch_loss += losses[i];
        correct += hits[i];
      }
      const double inv = 1.0 / static_cast<double>(bsize);
      for (auto& k : grads.kernels)
        for (auto& v : k.data) v *= inv;
      for (auto& b : grads.biases)
        for (auto& v : b) v *= inv;
      for (auto& v : grads.fc1_w.data()) v *= inv;
      for (auto& v : grads.fc1_b) v *= inv;
      for (auto& v : grads.fc2_w.data()) v *= inv;
      for (auto& v : grads.fc2_b) v *= inv;

      std::vector<std::vector<double>*> params;
      std::vector<const std::vector<double>*> gblocks;
      collect_params(grads, params, gblocks);
      adam_step(adam, params, gblocks);
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = epoch_loss / static_cast<double>(n);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    result.log.push_back(log);
  }
  return result;
}

Identification identify(const SpeechVggNet& net, const AudioSignal& sig,
                        const MaskModel* segregator, double pad_ms) {
  AudioSignal input = sig;
  if (segregator) input = segregate(*segregator, input);
  const auto windows = prepare_windows(input, pad_ms);

  std::vector<double> mean_log(net.n_speakers, 0.0);
  for (const auto& spec : windows) {
    auto probs = vgg_forward(net, spectrogram_to_input(spec));
    for (std::size_t k = 0; k < probs.size(); ++k)
      mean_log[k] += std::log(std::max(probs[k], 1e-300));
  }
  for (auto& v : mean_log) v /= static_cast<double>(windows.size());

  Identification out;
  out.posterior = softmax(mean_log);
  out.speaker = 0;
  for (std::size_t k = 1; k < out.posterior.size(); ++k)
    if (out.posterior[k] > out.posterior[out.speaker])
      out.speaker = static_cast<int>(k);
  return out;
}

void write_training_log_csv(const std::string& path,
                            const std::vector<EpochLog>& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("training log: cannot open " + path);
  f << "epoch,loss,train_accuracy\n";
  for (const auto& e : log)
    f << e.epoch << ',' << e.loss << ',' << e.train_accuracy << '\n';
}

void SpeechVggNet::to_bundle(ModelBundle& bundle, const std::string& prefix) const {
  bundle.put_int(prefix + ".n_speakers", static_cast<std::int64_t>(n_speakers));
  bundle.put_int(prefix + ".input_h", static_cast<std::int64_t>(input_h));
  bundle.put_int(prefix + ".input_w", static_cast<std::int64_t>(input_w));
  bundle.put_int(prefix + ".convs_per_block", cfg.convs_per_block);
  bundle.put_int(prefix + ".fc_dim", static_cast<std::int64_t>(cfg.fc_dim));
  std::vector<double> widths(cfg.widths.begin(), cfg.widths.end());
  bundle.put_vector(prefix + ".widths", widths);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const std::string kp = prefix + ".conv" + std::to_string(i);
    Tensor k = kernels[i];
    bundle.put_tensor(kp + ".k", std::move(k));
    bundle.put_vector(kp + ".b", biases[i]);
  }
  bundle.put_matrix(prefix + ".fc1.w", fc1_w);
  bundle.put_vector(prefix + ".fc1.b", fc1_b);
  bundle.put_matrix(prefix + ".fc2.w", fc2_w);
  bundle.put_vector(prefix + ".fc2.b", fc2_b);
}

SpeechVggNet SpeechVggNet::from_bundle(const ModelBundle& bundle,
                                       const std::string& prefix) {
  SpeechVggNet net;
  net.n_speakers = static_cast<std::size_t>(bundle.integer(prefix + ".n_speakers"));
  net.input_h = static_cast<std::size_t>(bundle.integer(prefix + ".input_h"));
  net.input_w = static_cast<std::size_t>(bundle.integer(prefix + ".input_w"));
  net.cfg.convs_per_block =
      static_cast<int>(bundle.integer(prefix + ".convs_per_block"));
  net.cfg.fc_dim = static_cast<std::size_t>(bundle.integer(prefix + ".fc_dim"));
  net.cfg.widths.clear();
  for (double w : bundle.vector(prefix + ".widths"))
    net.cfg.widths.push_back(static_cast<std::size_t>(w));
  const std::size_t n_convs =
      net.cfg.widths.size() * static_cast<std::size_t>(net.cfg.convs_per_block);
  for (std::size_t i = 0; i < n_convs; ++i) {
    const std::string kp = prefix + ".conv" + std::to_string(i);
    net.kernels.push_back(bundle.tensor(kp + ".k"));
    net.biases.push_back(bundle.vector(kp + ".b"));
  }
  net.fc1_w = bundle.matrix(prefix + ".fc1.w");
  net.fc1_b = bundle.vector(prefix + ".fc1.b");
  net.fc2_w = bundle.matrix(prefix + ".fc2.w");
  net.fc2_b = bundle.vector(prefix + ".fc2.b");
  return net;
}

}  // namespace casa
