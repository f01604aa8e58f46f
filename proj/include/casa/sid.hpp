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

#ifndef CASA_SID_HPP
#define CASA_SID_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "casa/filterbank.hpp"
#include "casa/mask.hpp"
#include "casa/model_io.hpp"
#include "casa/neural.hpp"

namespace casa {

// Five conv blocks (stacked 3x3 convs + ReLU + 2x2 max-pool) feeding two
// fully connected layers and a softmax. Widths default to desk scale; the
// paper-scale preset mirrors the VGG-16 footprint.
struct SpeechVggConfig {
  std::vector<std::size_t> widths = {8, 16, 32, 64, 64};
  int convs_per_block = 2;
  std::size_t fc_dim = 128;
};

SpeechVggConfig paper_scale_vgg();  // widths 64..512, fc 4096; not desk-trainable

struct TrainConfig {
  int epochs = 25;          // categorical cross-entropy epochs
  double lr = 4e-5;         // ADAM learning rate
  double pad_ms = 1024.0;   // zero-padding target per window
  std::size_t batch = 8;
  std::uint64_t seed = 1;
  SpeechVggConfig net;
};

struct SpeechVggNet {
  SpeechVggConfig cfg;
  std::size_t n_speakers = 0;
  std::size_t input_h = 0, input_w = 0;  // spectrogram bins x frames

  std::vector<Tensor> kernels;                // one per conv layer
  std::vector<std::vector<double>> biases;    // one per conv layer
  Matrix fc1_w;
  std::vector<double> fc1_b;
  Matrix fc2_w;
  std::vector<double> fc2_b;

  std::size_t n_blocks() const { return cfg.widths.size(); }

  void to_bundle(ModelBundle& bundle, const std::string& prefix) const;
  static SpeechVggNet from_bundle(const ModelBundle& bundle,
                                  const std::string& prefix);
};

// Spatial dims after `blocks` rounds of 2x2 pooling with floor division;
// dimensions of size 1 stop shrinking.
std::pair<std::size_t, std::size_t> pooled_dims(std::size_t h, std::size_t w,
                                                std::size_t blocks);

SpeechVggNet make_speech_vgg(const SpeechVggConfig& cfg, std::size_t n_speakers,
                             std::size_t input_h, std::size_t input_w, Rng& rng);

// Zero-pads to exactly pad_ms and takes the log spectrogram. Throws
// ValidationError if the signal is longer than the pad target (use
// prepare_windows for that).
Spectrogram prepare_input(const AudioSignal& sig, double pad_ms = 1024.0);

// Splits signals longer than pad_ms into consecutive windows, each padded.
std::vector<Spectrogram> prepare_windows(const AudioSignal& sig,
                                         double pad_ms = 1024.0);

// Per-spectrogram mean/variance normalization into a [1, F, T] tensor; this
// is what makes identification insensitive to global waveform gain.
Tensor spectrogram_to_input(const Spectrogram& spec);

std::vector<double> vgg_forward(const SpeechVggNet& net, const Tensor& input);

// Gradients w.r.t. every parameter, same layout as the net.
struct VggGradients {
  std::vector<Tensor> kernels;
  std::vector<std::vector<double>> biases;
  Matrix fc1_w;
  std::vector<double> fc1_b;
  Matrix fc2_w;
  std::vector<double> fc2_b;
};

VggGradients zero_vgg_gradients(const SpeechVggNet& net);
void accumulate(VggGradients& into, const VggGradients& from);

// Cross-entropy loss + full backward pass for one sample. probs_out, when
// given, receives the softmax output of the forward pass.
double vgg_backprop(const SpeechVggNet& net, const Tensor& input,
                    std::size_t label, VggGradients* grads,
                    std::vector<double>* probs_out = nullptr);

struct SidSample {
  AudioSignal signal;
  int speaker = 0;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct SidTrainResult {
  SpeechVggNet net;
  std::vector<EpochLog> log;
};

// Trains the classifier on (optionally segregated) signals. Deterministic
// under cfg.seed: batch-parallel gradient work is reduced in index order.
SidTrainResult train_sid(const std::vector<SidSample>& corpus,
                         const TrainConfig& cfg,
                         const MaskModel* segregator = nullptr);

struct Identification {
  int speaker = 0;
  std::vector<double> posterior;
};

// Runs the (optional) segregation front end, then aggregates per-window
// posteriors by mean log-probability.
Identification identify(const SpeechVggNet& net, const AudioSignal& sig,
                        const MaskModel* segregator = nullptr,
                        double pad_ms = 1024.0);

// Segregation front end shared by training, identify and the CLI.
AudioSignal segregate(const MaskModel& model, const AudioSignal& mixture);

void write_training_log_csv(const std::string& path,
                            const std::vector<EpochLog>& log);

}  // namespace casa

#endif  // CASA_SID_HPP
