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

#ifndef CASA_MASK_HPP
#define CASA_MASK_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "casa/features.hpp"
#include "casa/filterbank.hpp"
#include "casa/model_io.hpp"
#include "casa/neural.hpp"

namespace casa {

struct MaskConfig {
  double lc_db = 0.0;  // local criterion; 0 dB matches the 0 dB training mixes
  int channels = kNumChannels;

  // Raw feature layout: AMS 38 + RASTA-PLP 13 + MFCC 13 + pitch 1 = 65.
  std::size_t ams_dims = kAmsDims;
  std::size_t rasta_dims = kRastaDims;
  std::size_t mfcc_dims = kMfccDims;
  std::size_t pitch_dims = 1;
  std::size_t raw_dims() const {
    return ams_dims + rasta_dims + mfcc_dims + pitch_dims;
  }

  // Per-channel classifier sizes and schedules (unstated in the source
  // method; defaults are desk-scale choices).
  std::size_t hidden1 = 128;  // RBM-pretrained sigmoid layer
  std::size_t hidden2 = 128;  // ReLU layer; its activations feed the SVM
  int rbm_epochs = 50;
  double rbm_lr = 0.01;
  int mlp_epochs = 30;
  double mlp_lr = 1e-3;
  std::size_t batch = 32;
  double svm_c = 1.0;
  int svm_epochs = 400;
  double train_mix_ratio = 1.0;  // RMS ratio 1 => 0 dB training mixtures
  std::uint64_t seed = 1;
};

// Per-frame raw features for every channel of a mixture: per channel a
// T x 65 matrix [AMS(38, pre-PCA) | RASTA-PLP(13) | MFCC(13) | pitch(1)].
// The AMS block is channel-specific; the remaining dims are frame-global.
struct RawFeatures {
  std::vector<Matrix> per_channel;  // channels entries, each T x 65
  std::size_t n_frames = 0;
};

RawFeatures extract_raw_features(const AudioSignal& mixture, const WptTree& tree,
                                 const MaskConfig& cfg);

// Eq.-(6)-style ideal binary mask: 1 where the local SNR in dB is >= lc_db
// (inclusive). A unit with zero noise energy but positive target energy maps
// to 1; an all-silent unit maps to 0.
TFMask ideal_binary_mask(const Cochleagram& target_coch,
                         const Cochleagram& noise_coch, double lc_db);

// RBM-pretrained MLP plus linear SVM on concatenated raw + learned features,
// with the frozen preprocessing each stage needs.
struct ChannelClassifier {
  Pca ams_pca;                        // decorrelates the 38 AMS dims
  std::vector<double> in_lo, in_hi;   // min-max scaling into [0,1] for the RBM/MLP
  Mlp mlp;
  std::vector<double> feat_mean, feat_std;  // standardization of raw+learned
  LinearSvm svm;
  bool constant = false;  // fallback when training labels had one class
  int constant_value = 0;
};

struct MaskModel {
  MaskConfig config;
  std::vector<ChannelClassifier> channels;

  void to_bundle(ModelBundle& bundle, const std::string& prefix) const;
  static MaskModel from_bundle(const ModelBundle& bundle, const std::string& prefix);
};

// Trains the 18 per-channel classifiers from (target, noise) pairs: mixtures
// are built at config.train_mix_ratio, features come from the mixture, labels
// from the ideal binary mask of the aligned components. Channels train
// independently (and in parallel).
MaskModel train_mask_model(
    const std::vector<std::pair<AudioSignal, AudioSignal>>& pairs,
    const MaskConfig& config);

TFMask estimate_mask(const MaskModel& model, const AudioSignal& mixture);

struct HitFaResult {
  double hit = 0.0;
  double fa = 0.0;
  double hit_minus_fa = 0.0;
};

// HIT = fraction of truth-1 units predicted 1, FA = fraction of truth-0
// units predicted 1. Throws UndefinedMetricError when truth is one-class.
HitFaResult hit_fa(const TFMask& estimated, const TFMask& truth);

}  // namespace casa

#endif  // CASA_MASK_HPP
