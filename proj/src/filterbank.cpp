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

#include "casa/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casa/dsp.hpp"

namespace casa {

namespace {

// Daubechies-4 scaling coefficients (8 taps, orthonormal: sum h^2 = 1).
const double kDb4[8] = {
    0.2303778133088552,  0.7148465705525415,  0.6308807679295904,
    -0.02798376941698385, -0.1870348117188811, 0.03084138183598697,
    0.03288301166698295, -0.01059740178499728};

// Natural (filter-path) index of a frequency-ordered node. Each highpass
// branch reverses the child spectrum, so the path bits are the prefix-XOR of
// the band bits; inverting that gives the binary-reflected Gray code.
int natural_from_freq_index(int f) { return f ^ (f >> 1); }

// Periodized analysis step: out[i] = sum_n filt[n] * x[(2i + n) mod N].
void conv_down(const std::vector<double>& x, const double* filt,
               std::vector<double>& out) {
  const std::size_t n = x.size();
  out.assign(n / 2, 0.0);
  for (std::size_t i = 0; i < n / 2; ++i) {
    double acc = 0.0;
    const std::size_t base = 2 * i;
    if (base + 8 <= n) {
      for (int k = 0; k < 8; ++k) acc += filt[k] * x[base + k];
    } else {
      for (int k = 0; k < 8; ++k) acc += filt[k] * x[(base + k) % n];
    }
    out[i] = acc;
  }
}

// Adjoint of conv_down; accumulates into out (length N).
void up_conv_add(const std::vector<double>& band, const double* filt,
                 std::vector<double>& out) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < band.size(); ++i) {
    const double v = band[i];
    const std::size_t base = 2 * i;
    if (base + 8 <= n) {
      for (int k = 0; k < 8; ++k) out[base + k] += v * filt[k];
    } else {
      for (int k = 0; k < 8; ++k) out[(base + k) % n] += v * filt[k];
    }
  }
}

struct NodeKey {
  int depth;
  int natural;
  bool operator<(const NodeKey& o) const {
    return depth != o.depth ? depth < o.depth : natural < o.natural;
  }
  bool operator==(const NodeKey& o) const {
    return depth == o.depth && natural == o.natural;
  }
};

}  // namespace

const std::vector<LeafRun> kDefaultLeafLayout = {
    {5, 0, 10},  // 0..2500 Hz in 250 Hz bands
    {4, 5, 5},   // 2500..5000 Hz in 500 Hz bands
    {3, 5, 3},   // 5000..8000 Hz in 1000 Hz bands
};

WptTree build_tree() { return build_tree(kDefaultLeafLayout, kPipelineRate); }

WptTree build_tree(const std::vector<LeafRun>& layout, int sample_rate) {
  WptTree tree;
  tree.sample_rate = sample_rate;
  tree.analysis_lo.assign(kDb4, kDb4 + 8);
  tree.analysis_hi.resize(8);
  for (int n = 0; n < 8; ++n)
    tree.analysis_hi[n] = (n % 2 == 0 ? 1.0 : -1.0) * kDb4[7 - n];

  const double nyquist = sample_rate / 2.0;
  tree.max_depth = 0;
  for (const auto& run : layout) {
    for (int j = 0; j < run.count; ++j) {
      WptLeaf leaf;
      leaf.depth = run.depth;
      leaf.freq_index = run.first + j;
      leaf.natural_index = natural_from_freq_index(leaf.freq_index);
      const double band = nyquist / static_cast<double>(1 << run.depth);
      leaf.f_lo_hz = band * leaf.freq_index;
      leaf.f_hi_hz = band * (leaf.freq_index + 1);
      leaf.center_hz = 0.5 * (leaf.f_lo_hz + leaf.f_hi_hz);
      leaf.bandwidth_hz = band;
      tree.leaves.push_back(leaf);
      tree.max_depth = std::max(tree.max_depth, run.depth);
    }
  }
  std::sort(tree.leaves.begin(), tree.leaves.end(),
            [](const WptLeaf& a, const WptLeaf& b) { return a.center_hz < b.center_hz; });

  // Validate the tiling: bands must cover [0, nyquist] without gap/overlap.
  double cursor = 0.0;
  for (const auto& leaf : tree.leaves) {
    if (std::abs(leaf.f_lo_hz - cursor) > 1e-9)
      throw ValidationError("build_tree: leaves do not tile the band");
    cursor = leaf.f_hi_hz;
  }
  if (std::abs(cursor - nyquist) > 1e-9)
    throw ValidationError("build_tree: leaves do not reach Nyquist");

  const std::size_t depth_pow = static_cast<std::size_t>(1) << tree.max_depth;
  tree.pad_multiple = std::lcm(depth_pow, kDefaultHop);
  return tree;
}

std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t multiple) {
  const std::size_t n = x.size();
  std::size_t padded = ((n + multiple - 1) / multiple) * multiple;
  if (padded == 0) padded = multiple;
  std::vector<double> out(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
  for (std::size_t i = n; i < padded && n > 0; ++i) {
    const std::size_t over = i - n;
    const std::size_t mirror = (n >= 2 + over) ? (n - 2 - over) % n : over % n;
    out[i] = x[mirror];
  }
  return out;
}

SubbandSet analyze(const AudioSignal& sig, const WptTree& tree) {
  SubbandSet set;
  set.original_length = sig.samples.size();
  set.sample_rate = sig.sample_rate;
  set.depths.reserve(tree.leaves.size());
  for (const auto& leaf : tree.leaves) set.depths.push_back(leaf.depth);

  // Reflect-pad to a multiple of pad_multiple (covers 2^max_depth as well as
  // the default cochleagram hop).
  std::vector<double> x = reflect_pad(sig.samples, tree.pad_multiple);
  set.padded_length = x.size();

  // Walk the tree once; split a node only if a leaf lives underneath it.
  set.bands.resize(tree.leaves.size());
  struct Walker {
    const WptTree& tree;
    SubbandSet& set;

    bool subtree_has_leaf(int depth, int natural) const {
      for (const auto& leaf : tree.leaves) {
        if (leaf.depth < depth) continue;
        if ((leaf.natural_index >> (leaf.depth - depth)) == natural) return true;
      }
      return false;
    }

    int leaf_channel(int depth, int natural) const {
      for (std::size_t c = 0; c < tree.leaves.size(); ++c)
        if (tree.leaves[c].depth == depth && tree.leaves[c].natural_index == natural)
          return static_cast<int>(c);
      return -1;
    }

    void descend(std::vector<double>&& x, int depth, int natural) {
      const int ch = leaf_channel(depth, natural);
      if (ch >= 0) {
        set.bands[static_cast<std::size_t>(ch)] = std::move(x);
        return;
      }
      std::vector<double> lo, hi;
      const bool need_lo = subtree_has_leaf(depth + 1, 2 * natural);
      const bool need_hi = subtree_has_leaf(depth + 1, 2 * natural + 1);
      if (need_lo) {
        conv_down(x, tree.analysis_lo.data(), lo);
        descend(std::move(lo), depth + 1, 2 * natural);
      }
      if (need_hi) {
        conv_down(x, tree.analysis_hi.data(), hi);
        descend(std::move(hi), depth + 1, 2 * natural + 1);
      }
    }
  } walker{tree, set};
  walker.descend(std::move(x), 0, 0);
  return set;
}

AudioSignal synthesize(const SubbandSet& subbands, const WptTree& tree) {
  if (subbands.bands.size() != tree.leaves.size())
    throw ShapeError("synthesize: channel count does not match tree");

  struct Builder {
    const WptTree& tree;
    const SubbandSet& set;

    int leaf_channel(int depth, int natural) const {
      for (std::size_t c = 0; c < tree.leaves.size(); ++c)
        if (tree.leaves[c].depth == depth && tree.leaves[c].natural_index == natural)
          return static_cast<int>(c);
      return -1;
    }

    bool subtree_has_leaf(int depth, int natural) const {
      for (const auto& leaf : tree.leaves) {
        if (leaf.depth < depth) continue;
        if ((leaf.natural_index >> (leaf.depth - depth)) == natural) return true;
      }
      return false;
    }

    std::vector<double> ascend(int depth, int natural, std::size_t length) const {
      const int ch = leaf_channel(depth, natural);
      if (ch >= 0) {
        const auto& band = set.bands[static_cast<std::size_t>(ch)];
        if (band.size() != length)
          throw ShapeError("synthesize: band length mismatch");
        return band;
      }
      std::vector<double> out(length, 0.0);
      if (subtree_has_leaf(depth + 1, 2 * natural)) {
        auto lo = ascend(depth + 1, 2 * natural, length / 2);
        up_conv_add(lo, tree.analysis_lo.data(), out);
      }
      if (subtree_has_leaf(depth + 1, 2 * natural + 1)) {
        auto hi = ascend(depth + 1, 2 * natural + 1, length / 2);
        up_conv_add(hi, tree.analysis_hi.data(), out);
      }
      return out;
    }
  } builder{tree, subbands};

  std::vector<double> x = builder.ascend(0, 0, subbands.padded_length);
  AudioSignal out;
  out.sample_rate = subbands.sample_rate;
  out.samples.assign(x.begin(),
                     x.begin() + static_cast<std::ptrdiff_t>(subbands.original_length));
  return out;
}

void check_binary(const TFMask& mask) {
  for (double v : mask.values.data())
    if (v != 0.0 && v != 1.0)
      throw ValidationError("mask: values must be 0 or 1");
}

Cochleagram cochleagram(const SubbandSet& subbands, std::size_t frame_len,
                        std::size_t hop) {
  if (subbands.bands.empty()) throw ShapeError("cochleagram: empty subband set");
  if (subbands.padded_length < frame_len)
    throw DegenerateInputError("cochleagram: signal shorter than one frame");

  Cochleagram coch;
  coch.subbands = subbands;
  coch.frame_len = frame_len;
  coch.hop = hop;
  coch.n_frames = (subbands.padded_length - frame_len) / hop + 1;

  const std::size_t channels = subbands.bands.size();
  coch.energies = Matrix(channels, coch.n_frames, 0.0);
  coch.envelope = Matrix(channels, coch.n_frames, 0.0);

  for (std::size_t c = 0; c < channels; ++c) {
    const int depth = subbands.depths[c];
    const std::size_t dec = static_cast<std::size_t>(1) << depth;
    if (frame_len % dec != 0 || hop % dec != 0)
      throw ValidationError("cochleagram: frame/hop must divide by 2^depth");
    const std::size_t len_d = frame_len / dec;
    const std::size_t hop_d = hop / dec;
    const auto window = dsp::hamming_periodic(len_d);
    const auto& band = subbands.bands[c];
    const auto analytic = dsp::analytic_signal(band);
    for (std::size_t t = 0; t < coch.n_frames; ++t) {
      const std::size_t start = t * hop_d;
      double energy = 0.0, env = 0.0;
      for (std::size_t j = 0; j < len_d; ++j) {
        const double w = window[j] * band[start + j];
        energy += w * w;
        env += std::abs(analytic[start + j]);
      }
      coch.energies(c, t) = energy;
      coch.envelope(c, t) = env / static_cast<double>(len_d);
    }
  }
  return coch;
}

AudioSignal apply_mask_and_resynthesize(const Cochleagram& coch, const TFMask& mask,
                                        const WptTree& tree) {
  if (mask.values.rows() != coch.energies.rows() ||
      mask.values.cols() != coch.energies.cols())
    throw ShapeError("apply_mask: mask dimensions do not match cochleagram");

  SubbandSet masked = coch.subbands;
  const std::size_t channels = masked.bands.size();
  for (std::size_t c = 0; c < channels; ++c) {
    const int depth = masked.depths[c];
    const std::size_t dec = static_cast<std::size_t>(1) << depth;
    const std::size_t len_d = coch.frame_len / dec;
    const std::size_t hop_d = coch.hop / dec;
    const auto window = dsp::hamming_periodic(len_d);
    auto& band = masked.bands[c];
    std::vector<double> numer(band.size(), 0.0), denom(band.size(), 0.0);
    for (std::size_t t = 0; t < coch.n_frames; ++t) {
      const double m = mask.values(c, t);
      const std::size_t start = t * hop_d;
      for (std::size_t j = 0; j < len_d; ++j) {
        numer[start + j] += m * window[j];
        denom[start + j] += window[j];
      }
    }
    for (std::size_t i = 0; i < band.size(); ++i)
      band[i] = denom[i] > 0.0 ? band[i] * (numer[i] / denom[i]) : 0.0;
  }
  return synthesize(masked, tree);
}

Spectrogram spectrogram(const AudioSignal& sig) {
  if (sig.samples.empty()) throw DegenerateInputError("spectrogram: empty signal");
  Spectrogram spec;
  const std::size_t win = spec.window;
  const std::size_t hop = spec.hop;
  std::vector<double> x = sig.samples;
  if (x.size() < win) x.resize(win, 0.0);
  const std::size_t frames = (x.size() - win) / hop + 1;
  const auto window = dsp::hamming_periodic(win);
  spec.log_magnitudes = Matrix(win / 2 + 1, frames, 0.0);
  std::vector<double> frame(win);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < win; ++j) frame[j] = x[t * hop + j] * window[j];
    const auto mag = dsp::real_magnitude_spectrum(frame.data(), win, win);
    for (std::size_t k = 0; k < mag.size(); ++k)
      spec.log_magnitudes(k, t) = std::log10(std::max(mag[k], kLogFloor));
  }
  return spec;
}

}  // namespace casa
