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

#ifndef CASA_FILTERBANK_HPP
#define CASA_FILTERBANK_HPP

#include <cstddef>
#include <vector>

#include "casa/audio_io.hpp"
#include "casa/common.hpp"

namespace casa {

constexpr int kNumChannels = 18;
constexpr std::size_t kDefaultFrameLen = 320;  // 20 ms at 16 kHz
constexpr std::size_t kDefaultHop = 160;       // 10 ms, 50% overlap

// One leaf of the wavelet-packet tree. freq_index orders leaves by band
// position; natural_index is the filter path (Gray-code permutation of the
// frequency order).
struct WptLeaf {
  int depth = 0;
  int freq_index = 0;
  int natural_index = 0;
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
};

// db4 wavelet-packet cochlear filterbank. Leaves tile [0, Nyquist] without
// gap or overlap; bandwidths grow with center frequency.
struct WptTree {
  std::vector<double> analysis_lo;  // 8 taps, orthonormal
  std::vector<double> analysis_hi;
  std::vector<WptLeaf> leaves;      // ordered by center frequency
  int max_depth = 5;
  std::size_t pad_multiple = 160;   // lcm(2^max_depth, default hop)
  int sample_rate = kPipelineRate;
};

// Leaf layout given as (depth, first_freq_index, count) runs.
struct LeafRun {
  int depth;
  int first;
  int count;
};

// The 18-channel layout: 10 x 250 Hz, 5 x 500 Hz, 3 x 1000 Hz, spanning
// 0..8000 Hz with centers 125..7500 Hz.
extern const std::vector<LeafRun> kDefaultLeafLayout;

WptTree build_tree();
WptTree build_tree(const std::vector<LeafRun>& layout, int sample_rate);

// Decimated per-channel signals plus the padding bookkeeping needed to
// invert exactly.
struct SubbandSet {
  std::vector<std::vector<double>> bands;  // bands[c], length padded/2^depth
  std::vector<int> depths;                 // per-channel decimation depth
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
  int sample_rate = kPipelineRate;
};

// Reflect padding to the next multiple of `multiple`, as applied by analyze.
// Exposed so frame-based feature extraction sees the same sample grid.
std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t multiple);

// Wavelet-packet analysis. The input is reflect-padded to a multiple of
// tree.pad_multiple; energy over the padded signal is conserved exactly
// (orthonormal transform).
SubbandSet analyze(const AudioSignal& sig, const WptTree& tree);

// Exact inverse of analyze (perfect reconstruction); crops the padding.
AudioSignal synthesize(const SubbandSet& subbands, const WptTree& tree);

// 18 x T binary time-frequency mask.
struct TFMask {
  Matrix values;  // entries in {0, 1}

  std::size_t channels() const { return values.rows(); }
  std::size_t frames() const { return values.cols(); }
};

void check_binary(const TFMask& mask);

// Per-channel framed energies and envelope trajectory. Frames are defined on
// the input-time grid; each channel uses frame_len/2^depth subband samples
// under a periodic Hamming taper.
struct Cochleagram {
  SubbandSet subbands;
  std::size_t frame_len = kDefaultFrameLen;  // input-domain samples
  std::size_t hop = kDefaultHop;
  std::size_t n_frames = 0;
  Matrix energies;  // channels x T, sum of squared windowed subband samples
  Matrix envelope;  // channels x T, mean |analytic subband| per frame
};

Cochleagram cochleagram(const SubbandSet& subbands,
                        std::size_t frame_len = kDefaultFrameLen,
                        std::size_t hop = kDefaultHop);

// Scales every T-F unit by its mask value (weighted overlap-add, phase kept),
// then runs WPT synthesis. All-ones masks reconstruct the input exactly on
// frame-covered samples.
AudioSignal apply_mask_and_resynthesize(const Cochleagram& coch, const TFMask& mask,
                                        const WptTree& tree);

// Log-magnitude STFT image: Hamming window 256, hop 128, log10 floored at
// 1e-10.
struct Spectrogram {
  Matrix log_magnitudes;  // F x T, F = window/2 + 1
  std::size_t window = 256;
  std::size_t hop = 128;
};

constexpr double kLogFloor = 1e-10;

Spectrogram spectrogram(const AudioSignal& sig);

}  // namespace casa

#endif  // CASA_FILTERBANK_HPP
