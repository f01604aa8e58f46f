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

#ifndef CASA_TESTS_TEST_UTIL_HPP
#define CASA_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "casa/audio_io.hpp"
#include "casa/common.hpp"
#include "casa/dsp.hpp"

namespace casa_test {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Naive O(n^2) DFT magnitude; the ground-truth transform for small inputs.
inline std::vector<double> naive_dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1, 0.0);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) /
                       static_cast<double>(n);
      re += x[i] * std::cos(a);
      im += x[i] * std::sin(a);
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

// Dominant-frequency oracle via an FFT over the zero-padded signal.
inline double fft_peak_hz(const casa::AudioSignal& sig) {
  const std::size_t m = casa::dsp::next_pow2(sig.samples.size());
  std::vector<casa::dsp::cplx> buf(m, {0.0, 0.0});
  for (std::size_t i = 0; i < sig.samples.size(); ++i) buf[i] = sig.samples[i];
  casa::dsp::fft(buf);
  std::size_t best = 1;
  for (std::size_t k = 1; k <= m / 2; ++k)
    if (std::abs(buf[k]) > std::abs(buf[best])) best = k;
  return static_cast<double>(best) * sig.sample_rate / static_cast<double>(m);
}

inline double rel_l2_error(const std::vector<double>& ref,
                           const std::vector<double>& got) {
  double num = 0.0, den = 0.0;
  const std::size_t n = std::min(ref.size(), got.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double d = got[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  if (ref.size() != got.size()) return 1e300;
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// SNR of an estimate against the clean reference.
inline double snr_db(const std::vector<double>& clean,
                     const std::vector<double>& estimate) {
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    sig += clean[i] * clean[i];
    const double d = estimate[i] - clean[i];
    err += d * d;
  }
  return 10.0 * std::log10(sig / std::max(err, 1e-300));
}

inline casa::AudioSignal make_tone(double hz, double seconds, int rate = 16000,
                                   double amp = 0.5) {
  casa::AudioSignal sig;
  sig.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    sig.samples[i] = amp * std::sin(2.0 * kPi * hz * static_cast<double>(i) / rate);
  return sig;
}

inline casa::AudioSignal make_sawtooth(double hz, double seconds, int rate = 16000,
                                       double amp = 0.5) {
  casa::AudioSignal sig;
  sig.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = std::fmod(hz * static_cast<double>(i) / rate, 1.0);
    sig.samples[i] = amp * (2.0 * phase - 1.0);
  }
  return sig;
}

inline casa::AudioSignal make_white_noise(std::size_t n, std::uint64_t seed,
                                          int rate = 16000, double amp = 0.1) {
  casa::Rng rng(seed);
  casa::AudioSignal sig;
  sig.sample_rate = rate;
  sig.samples.resize(n);
  for (auto& v : sig.samples) v = amp * rng.normal();
  return sig;
}

// Unique-ish scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("casa_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace casa_test

#endif  // CASA_TESTS_TEST_UTIL_HPP
