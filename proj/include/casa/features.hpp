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

#ifndef CASA_FEATURES_HPP
#define CASA_FEATURES_HPP

#include <cstddef>
#include <vector>

#include "casa/common.hpp"
#include "casa/dsp.hpp"

namespace casa {

constexpr std::size_t kAmsDims = 38;
constexpr std::size_t kRastaDims = 13;
constexpr std::size_t kMfccDims = 13;
constexpr std::size_t kRawFeatureDims = kAmsDims + kRastaDims + kMfccDims + 1;

// Frequency-to-Mel map, M(f) = 1125 ln(1 + f/divisor). The printed divisor
// is 100; 700 is offered for interoperability with the conventional scale.
double mel(double f_hz, double divisor = 100.0);
double mel_inverse(double m, double divisor = 100.0);

// Triangular Mel filterbank over an FFT power spectrum.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t nfft, int sample_rate, std::size_t n_filters = 26,
                double fmin_hz = 50.0, double fmax_hz = 8000.0,
                double mel_divisor = 100.0);

  // power_spectrum has nfft/2 + 1 bins; returns per-filter energies.
  std::vector<double> apply(const std::vector<double>& power_spectrum) const;

  std::size_t size() const { return centers_hz_.size(); }
  double center_hz(std::size_t i) const { return centers_hz_[i]; }

 private:
  Matrix weights_;  // n_filters x (nfft/2 + 1)
  std::vector<double> centers_hz_;
};

constexpr double kFeatureLogFloor = 1e-10;

// 13 cepstra of one analysis frame: periodogram -> 26 Mel filters -> log
// (floored) -> orthonormal DCT-II, coefficients 0..12.
std::vector<double> mfcc_frame(const double* frame, std::size_t len,
                               const MelFilterbank& bank);

// RASTA band-pass along time: numerator (2 + z^-1 - z^-3 - 2 z^-4)/10,
// single pole 0.94. Zero initial state.
std::vector<double> rasta_filter(const std::vector<double>& x);

struct RastaPlpConfig {
  std::size_t frame_len = 320;
  int sample_rate = 16000;
  std::size_t nfft = 512;
  int lpc_order = 12;
  std::size_t n_cepstra = 13;
};

// Classical RASTA-PLP over a frame sequence (>= 5 frames): critical-band
// analysis, log, RASTA filtering, equal loudness + cube-root compression,
// order-12 LPC, cepstral conversion. Returns T x 13.
Matrix rasta_plp(const std::vector<std::vector<double>>& frames,
                 const RastaPlpConfig& cfg = {});

// Normalized-autocorrelation pitch with a 0.3 voicing threshold; search
// range 60..400 Hz. Returns 0 for unvoiced/silent frames.
double pitch_hz(const double* frame, std::size_t len, int sample_rate);

constexpr double kPitchVoicingThreshold = 0.3;
constexpr double kPitchMinHz = 60.0;
constexpr double kPitchMaxHz = 400.0;

// Principal component analysis; fit once on training rows, then frozen.
class Pca {
 public:
  Pca() = default;

  // rows = samples. Keeps the top n_components eigenvectors of the sample
  // covariance; zero-pads (with a warning on stderr) under rank deficiency.
  void fit(const Matrix& samples, std::size_t n_components);

  std::vector<double> project(const std::vector<double>& v) const;
  bool fitted() const { return fitted_; }
  std::size_t out_dims() const { return components_.rows(); }
  std::size_t in_dims() const { return mean_.size(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<double>& mean() const { return mean_; }
  const Matrix& components() const { return components_; }

  void set_state(std::vector<double> mean, Matrix components,
                 std::vector<double> eigenvalues);

 private:
  bool fitted_ = false;
  std::vector<double> mean_;
  Matrix components_;  // n_components x dims
  std::vector<double> eigenvalues_;
};

// Eq.-style split of a complex sub-band into a nonnegative message envelope
// and a unit-modulus carrier, plus the modulation spectrum restricted to
// 1..16 Hz.
struct ModulationDecomposition {
  std::vector<double> message;          // |analytic subband|
  std::vector<dsp::cplx> carrier;       // analytic / |analytic|
  std::vector<dsp::cplx> mod_spectrum;  // DFT(message) at 1..16 Hz bins
  std::vector<double> mod_freqs_hz;
};

ModulationDecomposition modulation_decompose(const std::vector<double>& subband,
                                             double subband_rate_hz);

// Amplitude-modulation spectrum of a per-frame envelope trajectory sampled
// at the frame rate: per frame, a 256-point rectangular window (reflected at
// the edges) is DFT'd and the 38 magnitude bins falling in 1..16 Hz are
// kept. PCA (fit during mask training) decorrelates the 38 dimensions.
Matrix ams_raw(const std::vector<double>& envelope_trajectory,
               double frame_rate_hz = 100.0);

constexpr std::size_t kAmsWindow = 256;
constexpr double kAmsLoHz = 1.0;
constexpr double kAmsHiHz = 16.0;

}  // namespace casa

#endif  // CASA_FEATURES_HPP
