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

#include "casa/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace casa {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double bark(double f_hz) { return 6.0 * std::asinh(f_hz / 600.0); }

// Hermansky's 40-dB equal-loudness approximation.
double equal_loudness(double f_hz) {
  const double f2 = f_hz * f_hz;
  const double num = (f2 + 56.8e6) * f2 * f2;
  const double den = (f2 + 6.3e6) * (f2 + 6.3e6) * (f2 + 0.38e9);
  return den > 0.0 ? num / den : 0.0;
}

// PLP critical-band masking curve on a bark offset.
double plp_band_weight(double bark_offset) {
  if (bark_offset < -1.3 || bark_offset > 2.5) return 0.0;
  if (bark_offset < -0.5) return std::pow(10.0, 2.5 * (bark_offset + 0.5));
  if (bark_offset <= 0.5) return 1.0;
  return std::pow(10.0, -1.0 * (bark_offset - 0.5));
}

// Levinson-Durbin; returns prediction error, fills a[1..order].
double levinson(const std::vector<double>& r, int order, std::vector<double>& a) {
  a.assign(static_cast<std::size_t>(order) + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  if (err <= 0.0) return 0.0;
  for (int i = 1; i <= order; ++i) {
    double acc = r[static_cast<std::size_t>(i)];
    for (int j = 1; j < i; ++j)
      acc += a[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(i - j)];
    const double k = -acc / err;
    std::vector<double> prev = a;
    for (int j = 1; j < i; ++j)
      a[static_cast<std::size_t>(j)] =
          prev[static_cast<std::size_t>(j)] + k * prev[static_cast<std::size_t>(i - j)];
    a[static_cast<std::size_t>(i)] = k;
    err *= (1.0 - k * k);
    if (err <= 0.0) return 0.0;
  }
  return err;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvectors come
// back as rows of V, paired with eigenvalues, unsorted.
void jacobi_eigen(Matrix a, std::vector<double>& eigenvalues, Matrix& vectors) {
  const std::size_t n = a.rows();
  vectors = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(p, k), vkq = vectors(q, k);
          vectors(p, k) = c * vkp - s * vkq;
          vectors(q, k) = s * vkp + c * vkq;
        }
      }
    }
  }
  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a(i, i);
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n <= 1) return 0;
  const std::ptrdiff_t period = 2 * (static_cast<std::ptrdiff_t>(n) - 1);
  std::ptrdiff_t j = i % period;
  if (j < 0) j += period;
  if (j >= static_cast<std::ptrdiff_t>(n)) j = period - j;
  return static_cast<std::size_t>(j);
}

}  // namespace

double mel(double f_hz, double divisor) {
  if (f_hz < 0.0) throw std::domain_error("mel: frequency must be nonnegative");
  return 1125.0 * std::log(1.0 + f_hz / divisor);
}

double mel_inverse(double m, double divisor) {
  return divisor * (std::exp(m / 1125.0) - 1.0);
}

MelFilterbank::MelFilterbank(std::size_t nfft, int sample_rate,
                             std::size_t n_filters, double fmin_hz, double fmax_hz,
                             double mel_divisor) {
  const std::size_t n_bins = nfft / 2 + 1;
  weights_ = Matrix(n_filters, n_bins, 0.0);
  centers_hz_.resize(n_filters);
  const double mel_lo = mel(fmin_hz, mel_divisor);
  const double mel_hi = mel(std::min(fmax_hz, sample_rate / 2.0), mel_divisor);
  std::vector<double> edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_inverse(
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_filters + 1),
        mel_divisor);
  for (std::size_t m = 0; m < n_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    centers_hz_[m] = mid;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      if (f <= lo || f >= hi) continue;
      weights_(m, k) = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
}

std::vector<double> MelFilterbank::apply(
    const std::vector<double>& power_spectrum) const {
  if (power_spectrum.size() != weights_.cols())
    throw ShapeError("MelFilterbank: spectrum size mismatch");
  std::vector<double> out(weights_.rows(), 0.0);
  for (std::size_t m = 0; m < weights_.rows(); ++m) {
    double acc = 0.0;
    const double* w = weights_.row(m);
    for (std::size_t k = 0; k < power_spectrum.size(); ++k)
      acc += w[k] * power_spectrum[k];
    out[m] = acc;
  }
  return out;
}

std::vector<double> mfcc_frame(const double* frame, std::size_t len,
                               const MelFilterbank& bank) {
  const std::size_t nfft = 512;
  const auto window = dsp::hamming_symmetric(len);
  std::vector<double> tapered(len);
  for (std::size_t i = 0; i < len; ++i) tapered[i] = frame[i] * window[i];
  auto mag = dsp::real_magnitude_spectrum(tapered.data(), len, nfft);
  std::vector<double> power(mag.size());
  for (std::size_t k = 0; k < mag.size(); ++k)
    power[k] = mag[k] * mag[k] / static_cast<double>(len);
  auto energies = bank.apply(power);
  for (auto& e : energies) e = std::log(std::max(e, kFeatureLogFloor));
  auto ceps = dsp::dct2_orthonormal(energies);
  ceps.resize(kMfccDims);
  return ceps;
}

std::vector<double> rasta_filter(const std::vector<double>& x) {
  // H(z) = 0.1 (2 + z^-1 - z^-3 - 2 z^-4) / (1 - 0.94 z^-1)
  static const double num[5] = {0.2, 0.1, 0.0, -0.1, -0.2};
  const double pole = 0.94;
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 5 && k <= n; ++k) acc += num[k] * x[n - k];
    if (n > 0) acc += pole * y[n - 1];
    y[n] = acc;
  }
  return y;
}

Matrix rasta_plp(const std::vector<std::vector<double>>& frames,
                 const RastaPlpConfig& cfg) {
  if (frames.size() < 5)
    throw DegenerateInputError("rasta_plp: need at least 5 frames");
  const std::size_t n_frames = frames.size();
  const double nyquist = cfg.sample_rate / 2.0;
  const std::size_t n_bands = static_cast<std::size_t>(std::ceil(bark(nyquist))) + 1;
  const std::size_t n_bins = cfg.nfft / 2 + 1;

  // Critical-band weights, 1-bark spacing.
  Matrix cb(n_bands, n_bins, 0.0);
  for (std::size_t b = 0; b < n_bands; ++b) {
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate /
                       static_cast<double>(cfg.nfft);
      cb(b, k) = plp_band_weight(bark(f) - static_cast<double>(b));
    }
  }

  // Log critical-band trajectories.
  Matrix log_bands(n_bands, n_frames, 0.0);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const auto& frame = frames[t];
    const auto window = dsp::hamming_symmetric(frame.size());
    std::vector<double> tapered(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) tapered[i] = frame[i] * window[i];
    auto mag = dsp::real_magnitude_spectrum(tapered.data(), tapered.size(), cfg.nfft);
    std::vector<double> power(mag.size());
    for (std::size_t k = 0; k < mag.size(); ++k)
      power[k] = mag[k] * mag[k] / static_cast<double>(frame.size());
    for (std::size_t b = 0; b < n_bands; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) acc += cb(b, k) * power[k];
      log_bands(b, t) = std::log(std::max(acc, kFeatureLogFloor));
    }
  }

  // RASTA filtering along time, then back to the linear domain.
  Matrix shaped(n_bands, n_frames, 0.0);
  for (std::size_t b = 0; b < n_bands; ++b) {
    std::vector<double> traj(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) traj[t] = log_bands(b, t);
    auto filtered = rasta_filter(traj);
    for (std::size_t t = 0; t < n_frames; ++t) shaped(b, t) = std::exp(filtered[t]);
  }

  // Equal loudness and intensity-loudness compression at band centers.
  std::vector<double> band_center_hz(n_bands);
  for (std::size_t b = 0; b < n_bands; ++b)
    band_center_hz[b] = 600.0 * std::sinh(static_cast<double>(b) / 6.0);
  for (std::size_t b = 0; b < n_bands; ++b) {
    const double el = equal_loudness(band_center_hz[b]);
    for (std::size_t t = 0; t < n_frames; ++t)
      shaped(b, t) = std::pow(std::max(el * shaped(b, t), 0.0), 0.33);
  }
  // Duplicate edge bands (classic fixup for the zero-weighted DC band).
  for (std::size_t t = 0; t < n_frames; ++t) {
    shaped(0, t) = shaped(1, t);
    shaped(n_bands - 1, t) = shaped(n_bands - 2, t);
  }

  // Per frame: symmetric IDFT -> autocorrelation -> LPC -> cepstra.
  Matrix ceps(n_frames, cfg.n_cepstra, 0.0);
  const std::size_t sym_len = 2 * (n_bands - 1);
  for (std::size_t t = 0; t < n_frames; ++t) {
    std::vector<double> sym(sym_len);
    for (std::size_t b = 0; b < n_bands; ++b) sym[b] = shaped(b, t);
    for (std::size_t b = 1; b + 1 < n_bands; ++b) sym[sym_len - b] = shaped(b, t);
    std::vector<double> r(static_cast<std::size_t>(cfg.lpc_order) + 1, 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < sym_len; ++j)
        acc += sym[j] * std::cos(2.0 * kPi * static_cast<double>(k) *
                                 static_cast<double>(j) / static_cast<double>(sym_len));
      r[k] = acc / static_cast<double>(sym_len);
    }
    std::vector<double> a;
    double err = levinson(r, cfg.lpc_order, a);
    std::vector<double> c(cfg.n_cepstra, 0.0);
    c[0] = std::log(std::max(err, kFeatureLogFloor));
    for (std::size_t n = 1; n < cfg.n_cepstra; ++n) {
      double acc = n <= static_cast<std::size_t>(cfg.lpc_order) ? -a[n] : 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        const std::size_t idx = n - k;
        if (idx <= static_cast<std::size_t>(cfg.lpc_order))
          acc -= (static_cast<double>(k) / static_cast<double>(n)) * c[k] * a[idx];
      }
      c[n] = acc;
    }
    for (std::size_t k = 0; k < cfg.n_cepstra; ++k) ceps(t, k) = c[k];
  }
  return ceps;
}

double pitch_hz(const double* frame, std::size_t len, int sample_rate) {
  const std::size_t min_lag =
      static_cast<std::size_t>(std::floor(sample_rate / kPitchMaxHz));
  const std::size_t max_lag =
      static_cast<std::size_t>(std::ceil(sample_rate / kPitchMinHz));
  if (len < max_lag + 2) throw DegenerateInputError("pitch: frame too short");

  double energy0 = 0.0;
  for (std::size_t i = 0; i < len; ++i) energy0 += frame[i] * frame[i];
  if (energy0 <= 1e-20) return 0.0;

  std::vector<double> score(max_lag + 1, 0.0);
  double best = 0.0;
  std::size_t best_lag = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    double num = 0.0, e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i + lag < len; ++i) {
      num += frame[i] * frame[i + lag];
      e1 += frame[i] * frame[i];
      e2 += frame[i + lag] * frame[i + lag];
    }
    const double den = std::sqrt(e1 * e2);
    score[lag] = den > 1e-20 ? num / den : 0.0;
    if (score[lag] > best) {
      best = score[lag];
      best_lag = lag;
    }
  }
  if (best < kPitchVoicingThreshold || best_lag == 0) return 0.0;

  // Sub-octave correction: a periodic signal peaks at every multiple of the
  // true lag, so take the shortest local maximum close to the global one.
  for (std::size_t lag = min_lag + 1; lag < best_lag; ++lag) {
    if (score[lag] >= 0.9 * best && score[lag] >= score[lag - 1] &&
        score[lag] >= score[lag + 1]) {
      best_lag = lag;
      best = score[lag];
      break;
    }
  }

  // Parabolic refinement around the winning lag.
  double lag = static_cast<double>(best_lag);
  if (best_lag > min_lag && best_lag < max_lag) {
    const double y0 = score[best_lag - 1], y1 = score[best_lag], y2 = score[best_lag + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (std::abs(denom) > 1e-12) lag += 0.5 * (y0 - y2) / denom;
  }
  const double hz = sample_rate / lag;
  if (hz < kPitchMinHz || hz > kPitchMaxHz) return 0.0;
  return hz;
}

void Pca::fit(const Matrix& samples, std::size_t n_components) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  if (n < 2) throw DegenerateInputError("pca: need at least 2 samples");

  mean_.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean_[j] += samples(i, j);
  for (auto& m : mean_) m /= static_cast<double>(n);

  Matrix cov(d, d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = samples(i, j) - mean_[j];
      for (std::size_t k = j; k < d; ++k)
        cov(j, k) += xj * (samples(i, k) - mean_[k]);
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) {
      cov(j, k) /= static_cast<double>(n - 1);
      cov(k, j) = cov(j, k);
    }

  std::vector<double> evals;
  Matrix evecs;
  jacobi_eigen(cov, evals, evecs);

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return evals[a] > evals[b]; });

  components_ = Matrix(n_components, d, 0.0);
  eigenvalues_.assign(n_components, 0.0);
  std::size_t usable = 0;
  for (std::size_t i = 0; i < n_components && i < d; ++i) {
    if (evals[order[i]] <= 1e-12) break;
    for (std::size_t j = 0; j < d; ++j)
      components_(i, j) = evecs(order[i], j);
    eigenvalues_[i] = evals[order[i]];
    ++usable;
  }
  if (usable < n_components)
    std::cerr << "pca: rank-deficient data, keeping " << usable << " of "
              << n_components << " components (rest zero-padded)\n";
  fitted_ = true;
}

std::vector<double> Pca::project(const std::vector<double>& v) const {
  if (!fitted_) throw StateError("pca: project called before fit");
  if (v.size() != mean_.size()) throw ShapeError("pca: dimension mismatch");
  std::vector<double> out(components_.rows(), 0.0);
  for (std::size_t i = 0; i < components_.rows(); ++i) {
    double acc = 0.0;
    const double* row = components_.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) acc += row[j] * (v[j] - mean_[j]);
    out[i] = acc;
  }
  return out;
}

void Pca::set_state(std::vector<double> mean, Matrix components,
                    std::vector<double> eigenvalues) {
  mean_ = std::move(mean);
  components_ = std::move(components);
  eigenvalues_ = std::move(eigenvalues);
  fitted_ = true;
}

ModulationDecomposition modulation_decompose(const std::vector<double>& subband,
                                             double subband_rate_hz) {
  ModulationDecomposition out;
  const auto analytic = dsp::analytic_signal(subband);
  out.message.resize(analytic.size());
  out.carrier.resize(analytic.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double mag = std::abs(analytic[i]);
    out.message[i] = mag;
    out.carrier[i] = mag > 1e-300 ? analytic[i] / mag : dsp::cplx(1.0, 0.0);
  }
  const std::size_t m = dsp::next_pow2(std::max<std::size_t>(out.message.size(), 2));
  std::vector<dsp::cplx> buf(m, dsp::cplx(0.0, 0.0));
  for (std::size_t i = 0; i < out.message.size(); ++i) buf[i] = out.message[i];
  dsp::fft(buf);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double f = static_cast<double>(k) * subband_rate_hz / static_cast<double>(m);
    if (f >= kAmsLoHz && f <= kAmsHiHz) {
      out.mod_spectrum.push_back(buf[k]);
      out.mod_freqs_hz.push_back(f);
    }
  }
  return out;
}

Matrix ams_raw(const std::vector<double>& envelope_trajectory, double frame_rate_hz) {
  const std::size_t n = envelope_trajectory.size();
  if (n == 0) throw DegenerateInputError("ams: empty envelope trajectory");
  const std::size_t win = kAmsWindow;
  const double bin_hz = frame_rate_hz / static_cast<double>(win);
  const std::size_t k_lo = static_cast<std::size_t>(std::ceil(kAmsLoHz / bin_hz));
  const std::size_t k_hi = static_cast<std::size_t>(std::floor(kAmsHiHz / bin_hz));
  const std::size_t dims = k_hi - k_lo + 1;

  Matrix out(n, dims, 0.0);
  std::vector<dsp::cplx> buf(win);
  for (std::size_t t = 0; t < n; ++t) {
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(win) / 2;
    for (std::size_t j = 0; j < win; ++j)
      buf[j] = dsp::cplx(
          envelope_trajectory[reflect_index(start + static_cast<std::ptrdiff_t>(j), n)],
          0.0);
    dsp::fft(buf);
    for (std::size_t k = k_lo; k <= k_hi; ++k)
      out(t, k - k_lo) = std::abs(buf[k]);
  }
  return out;
}

}  // namespace casa
