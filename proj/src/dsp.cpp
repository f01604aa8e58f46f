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

#include "casa/dsp.hpp"

#include <cmath>

#include "casa/common.hpp"

namespace casa {
namespace dsp {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<cplx>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return;
  if ((n & (n - 1)) != 0) throw ShapeError("fft: length must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx u = x[i + k];
        cplx v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv;
  }
}

std::vector<double> real_magnitude_spectrum(const double* frame, std::size_t len,
                                            std::size_t nfft) {
  std::vector<cplx> buf(nfft, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < len && i < nfft; ++i) buf[i] = cplx(frame[i], 0.0);
  fft(buf);
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<cplx> analytic_signal(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t m = next_pow2(n);
  std::vector<cplx> buf(m, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) buf[i] = cplx(x[i], 0.0);
  fft(buf);
  // Keep DC and Nyquist, double positive frequencies, zero negative ones.
  for (std::size_t k = 1; k < m / 2; ++k) buf[k] *= 2.0;
  for (std::size_t k = m / 2 + 1; k < m; ++k) buf[k] = cplx(0.0, 0.0);
  fft(buf, /*inverse=*/true);
  buf.resize(n);
  return buf;
}

std::vector<double> hamming_periodic(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(len));
  return w;
}

std::vector<double> hamming_symmetric(std::size_t len) {
  std::vector<double> w(len);
  if (len == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(len - 1));
  return w;
}

std::vector<double> dct2_orthonormal(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double s = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(kPi / static_cast<double>(n) *
                             (static_cast<double>(i) + 0.5) * static_cast<double>(k));
    y[k] = acc * (k == 0 ? s0 : s);
  }
  return y;
}

std::vector<double> idct2_orthonormal(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double s = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double acc = x[0] * s0;
    for (std::size_t k = 1; k < n; ++k)
      acc += x[k] * s *
             std::cos(kPi / static_cast<double>(n) * (static_cast<double>(i) + 0.5) *
                      static_cast<double>(k));
    y[i] = acc;
  }
  return y;
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace dsp
}  // namespace casa
