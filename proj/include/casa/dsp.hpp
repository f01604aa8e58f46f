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

#ifndef CASA_DSP_HPP
#define CASA_DSP_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace casa {
namespace dsp {

using cplx = std::complex<double>;

// In-place iterative radix-2 FFT. n must be a power of two.
void fft(std::vector<cplx>& x, bool inverse = false);

std::size_t next_pow2(std::size_t n);

// Magnitude spectrum of a real frame, zero padded to nfft (power of two).
// Returns nfft/2 + 1 bins.
std::vector<double> real_magnitude_spectrum(const double* frame, std::size_t len,
                                            std::size_t nfft);

// Analytic signal of a real vector (negative frequencies zeroed). The input
// is zero padded to the next power of two internally; the returned vector has
// the original length.
std::vector<cplx> analytic_signal(const std::vector<double>& x);

// Periodic (DFT-even) Hamming window; sums to a constant under 50% overlap.
std::vector<double> hamming_periodic(std::size_t len);

// Symmetric Hamming window, the classic frame taper.
std::vector<double> hamming_symmetric(std::size_t len);

// Orthonormal DCT-II of a vector.
std::vector<double> dct2_orthonormal(const std::vector<double>& x);
// Inverse (DCT-III with matching normalization).
std::vector<double> idct2_orthonormal(const std::vector<double>& x);

double rms(const std::vector<double>& x);

}  // namespace dsp
}  // namespace casa

#endif  // CASA_DSP_HPP
