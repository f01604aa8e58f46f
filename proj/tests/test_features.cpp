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

#include "casa/features.hpp"
#include "test_util.hpp"

using namespace casa;
using namespace casa_test;

TEST_CASE("mel: printed-formula values and monotonicity") {
  CHECK(mel(0.0) == 0.0);
  CHECK(mel(100.0, 100.0) == doctest::Approx(1125.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(mel(100.0, 100.0) == doctest::Approx(779.815).epsilon(1e-4));
  double prev = -1.0;
  for (double f = 0.0; f <= 8000.0; f += 50.0) {
    const double m = mel(f);
    CHECK(m > prev);
    prev = m;
  }
  CHECK_THROWS_AS(mel(-1.0), std::domain_error);

  // Conventional divisor stays available.
  CHECK(mel(700.0, 700.0) == doctest::Approx(1125.0 * std::log(2.0)));
  CHECK(mel_inverse(mel(440.0, 100.0), 100.0) == doctest::Approx(440.0));
}

TEST_CASE("mfcc: zero frame has only the DC cepstrum") {
  MelFilterbank bank(512, 16000);
  std::vector<double> zeros(320, 0.0);
  auto ceps = mfcc_frame(zeros.data(), zeros.size(), bank);
  REQUIRE(ceps.size() == 13);
  CHECK(ceps[0] ==
        doctest::Approx(std::sqrt(26.0) * std::log(1e-10)).epsilon(1e-9));
  for (std::size_t k = 1; k < ceps.size(); ++k)
    CHECK(ceps[k] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mfcc: tone at a filter center maximizes that filter's energy") {
  MelFilterbank bank(512, 16000);
  const std::size_t probe = 12;
  const double hz = bank.center_hz(probe);
  AudioSignal tone = make_tone(hz, 0.02, 16000, 0.5);  // one analysis frame
  const auto window = dsp::hamming_symmetric(320);
  std::vector<double> tapered(320);
  for (std::size_t i = 0; i < 320; ++i) tapered[i] = tone.samples[i] * window[i];
  auto mag = dsp::real_magnitude_spectrum(tapered.data(), 320, 512);
  std::vector<double> power(mag.size());
  for (std::size_t k = 0; k < mag.size(); ++k) power[k] = mag[k] * mag[k] / 320.0;
  auto energies = bank.apply(power);
  std::size_t best = 0;
  for (std::size_t m = 1; m < energies.size(); ++m)
    if (energies[m] > energies[best]) best = m;
  CHECK(best == probe);
}

TEST_CASE("mfcc: negated frame yields identical coefficients") {
  MelFilterbank bank(512, 16000);
  AudioSignal tone = make_sawtooth(180.0, 0.02);
  std::vector<double> neg(tone.samples.begin(), tone.samples.begin() + 320);
  std::vector<double> pos = neg;
  for (auto& v : neg) v = -v;
  auto a = mfcc_frame(pos.data(), pos.size(), bank);
  auto b = mfcc_frame(neg.data(), neg.size(), bank);
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("dct: orthonormal round trip") {
  Rng rng(17);
  std::vector<double> x(26);
  for (auto& v : x) v = rng.normal();
  auto y = dsp::dct2_orthonormal(x);
  auto back = dsp::idct2_orthonormal(y);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));
}

TEST_CASE("rasta filter: DC rejection and zero-sum impulse response") {
  // Impulse response sums to zero (zero at z = 1).
  std::vector<double> impulse(400, 0.0);
  impulse[0] = 1.0;
  auto h = rasta_filter(impulse);
  double sum = 0.0;
  for (double v : h) sum += v;
  CHECK(std::abs(sum) < 1e-10);

  // Constant input decays to zero after the transient.
  std::vector<double> dc(400, 3.7);
  auto y = rasta_filter(dc);
  for (std::size_t i = 300; i < y.size(); ++i) CHECK(std::abs(y[i]) < 1e-3);
}

TEST_CASE("rasta_plp: dimensions, finiteness, gain invariance") {
  AudioSignal voice = make_sawtooth(140.0, 0.4);
  std::vector<std::vector<double>> frames;
  for (std::size_t start = 0; start + 320 <= voice.samples.size(); start += 160)
    frames.emplace_back(voice.samples.begin() + start,
                        voice.samples.begin() + start + 320);
  Matrix ceps = rasta_plp(frames);
  CHECK(ceps.rows() == frames.size());
  CHECK(ceps.cols() == 13);
  for (double v : ceps.data()) CHECK(std::isfinite(v));

  // Constant gain cancels through log + DC rejection (steady state).
  std::vector<std::vector<double>> scaled = frames;
  for (auto& f : scaled)
    for (auto& v : f) v *= 3.0;
  Matrix ceps2 = rasta_plp(scaled);
  const std::size_t t = frames.size() - 1;  // well past the filter warm-up
  for (std::size_t k = 0; k < 13; ++k)
    CHECK(ceps2(t, k) == doctest::Approx(ceps(t, k)).epsilon(5e-2));

  CHECK_THROWS_AS(rasta_plp({frames[0], frames[1]}), DegenerateInputError);
}

TEST_CASE("rasta: slow channel gain drift is suppressed on white noise") {
  // Stationary white noise with a slow (0.2 Hz) gain wander: the log band
  // trajectory is dominated by the wander, which sits below the RASTA
  // pass band, so filtering must strip most of the variance.
  AudioSignal noise = make_white_noise(64000, 31);
  for (std::size_t i = 0; i < noise.samples.size(); ++i)
    noise.samples[i] *= std::exp(std::sin(2.0 * kPi * 0.2 * i / 16000.0));

  std::vector<double> log_energy;
  for (std::size_t start = 0; start + 320 <= noise.samples.size(); start += 160) {
    double e = 0.0;
    for (std::size_t j = 0; j < 320; ++j)
      e += noise.samples[start + j] * noise.samples[start + j];
    log_energy.push_back(std::log(std::max(e, 1e-10)));
  }
  auto filtered = rasta_filter(log_energy);
  auto variance = [](const std::vector<double>& x, std::size_t from) {
    double mean = 0.0;
    for (std::size_t i = from; i < x.size(); ++i) mean += x[i];
    mean /= static_cast<double>(x.size() - from);
    double acc = 0.0;
    for (std::size_t i = from; i < x.size(); ++i)
      acc += (x[i] - mean) * (x[i] - mean);
    return acc / static_cast<double>(x.size() - from);
  };
  CHECK(variance(filtered, 60) < 0.25 * variance(log_energy, 60));
}

TEST_CASE("pitch: sawtooth, noise, silence") {
  AudioSignal saw = make_sawtooth(200.0, 0.05);
  const double hz = pitch_hz(saw.samples.data(), 640, 16000);
  CHECK(std::abs(hz - 200.0) <= 2.0);

  AudioSignal noise = make_white_noise(640, 555);
  CHECK(pitch_hz(noise.samples.data(), 640, 16000) == 0.0);

  std::vector<double> silence(640, 0.0);
  CHECK(pitch_hz(silence.data(), 640, 16000) == 0.0);
}

TEST_CASE("pca: axis-aligned data recovers the axes up to sign") {
  Rng rng(7);
  const std::size_t n = 500;
  Matrix data(n, 3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    data(i, 0) = 5.0 * rng.normal();
    data(i, 1) = 2.0 * rng.normal();
    data(i, 2) = 0.5 * rng.normal();
  }
  Pca pca;
  pca.fit(data, 3);
  // Component 0 aligns with axis 0, etc.
  for (std::size_t k = 0; k < 3; ++k) {
    const double* row = pca.components().row(k);
    CHECK(std::abs(row[k]) > 0.99);
  }
  // Eigenvalues come back in decreasing order near 25, 4, 0.25.
  CHECK(pca.eigenvalues()[0] > pca.eigenvalues()[1]);
  CHECK(pca.eigenvalues()[1] > pca.eigenvalues()[2]);
}

TEST_CASE("pca: mean vector projects to zero; state errors") {
  Rng rng(8);
  Matrix data(100, 4, 0.0);
  for (auto& v : data.data()) v = rng.uniform(-1.0, 4.0);
  Pca pca;
  CHECK_THROWS_AS(pca.project({1, 2, 3, 4}), StateError);
  pca.fit(data, 2);
  std::vector<double> mean(4, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < 4; ++j) mean[j] += data(i, j);
  for (auto& v : mean) v /= static_cast<double>(data.rows());
  auto proj = pca.project(mean);
  for (double v : proj) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pca: reconstruction error equals the discarded eigenvalue mass") {
  Rng rng(9);
  const std::size_t n = 400, d = 6, k = 3;
  Matrix data(n, d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      data(i, j) = (1.0 + static_cast<double>(j)) * rng.normal() +
                   0.3 * rng.normal();
  Pca full;
  full.fit(data, d);
  Pca reduced;
  reduced.fit(data, k);

  // Mean squared reconstruction error with (n-1) normalization equals the
  // sum of the discarded eigenvalues (eigendecomposition oracle).
  double discarded = 0.0;
  for (std::size_t j = k; j < d; ++j) discarded += full.eigenvalues()[j];

  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(data.row(i), data.row(i) + d);
    auto z = reduced.project(x);
    // Reconstruct: mean + components^T z.
    std::vector<double> rec(reduced.mean());
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t j = 0; j < d; ++j)
        rec[j] += reduced.components()(kk, j) * z[kk];
    for (std::size_t j = 0; j < d; ++j) err += (x[j] - rec[j]) * (x[j] - rec[j]);
  }
  err /= static_cast<double>(n - 1);
  CHECK(err == doctest::Approx(discarded).epsilon(1e-6));
}

TEST_CASE("modulation decomposition: envelope identity and unit carrier") {
  AudioSignal sig = make_tone(1000.0, 0.128);
  for (std::size_t i = 0; i < sig.samples.size(); ++i)
    sig.samples[i] *= 1.0 + 0.5 * std::cos(2.0 * kPi * 8.0 * i / 16000.0);
  auto dec = modulation_decompose(sig.samples, 16000.0);
  REQUIRE(dec.message.size() == sig.samples.size());
  const auto analytic = dsp::analytic_signal(sig.samples);
  for (std::size_t i = 0; i < dec.message.size(); ++i) {
    CHECK(dec.message[i] == doctest::Approx(std::abs(analytic[i])).epsilon(1e-12));
    CHECK(std::abs(dec.carrier[i]) == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (double f : dec.mod_freqs_hz) {
    CHECK(f >= 1.0);
    CHECK(f <= 16.0);
  }
}

TEST_CASE("ams: 38 dims, DC exclusion, 8 Hz peak, amplitude linearity") {
  // Constant envelope: everything sits at the excluded DC bin.
  std::vector<double> constant(300, 2.5);
  Matrix flat = ams_raw(constant, 100.0);
  CHECK(flat.cols() == 38);
  for (double v : flat.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));

  // 8 Hz amplitude modulation peaks near 8 Hz.
  std::vector<double> am(300);
  for (std::size_t t = 0; t < am.size(); ++t)
    am[t] = 1.0 + 0.5 * std::cos(2.0 * kPi * 8.0 * static_cast<double>(t) / 100.0);
  Matrix ams = ams_raw(am, 100.0);
  const std::size_t mid = am.size() / 2;
  std::size_t best = 0;
  for (std::size_t k = 1; k < ams.cols(); ++k)
    if (ams(mid, k) > ams(mid, best)) best = k;
  const double bin_hz = 100.0 / 256.0;
  const double peak_hz = (3.0 + static_cast<double>(best)) * bin_hz;
  CHECK(std::abs(peak_hz - 8.0) <= 0.4);

  // Scaling the envelope scales the features linearly.
  std::vector<double> doubled(am);
  for (auto& v : doubled) v *= 2.0;
  Matrix ams2 = ams_raw(doubled, 100.0);
  for (std::size_t k = 0; k < ams.cols(); ++k)
    CHECK(ams2(mid, k) == doctest::Approx(2.0 * ams(mid, k)).epsilon(1e-9));
}

TEST_CASE("feature vectors stay finite on silence") {
  MelFilterbank bank(512, 16000);
  std::vector<double> silence(320, 0.0);
  for (double v : mfcc_frame(silence.data(), silence.size(), bank))
    CHECK(std::isfinite(v));
  std::vector<std::vector<double>> frames(6, silence);
  for (double v : rasta_plp(frames).data()) CHECK(std::isfinite(v));
  std::vector<double> flat_env(50, 0.0);
  for (double v : ams_raw(flat_env, 100.0).data()) CHECK(std::isfinite(v));
}
