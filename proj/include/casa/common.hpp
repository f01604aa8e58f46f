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

#ifndef CASA_COMMON_HPP
#define CASA_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace casa {

// Error taxonomy. Every throwing path in the library uses one of these so
// callers (and the CLI) can map failures to exit codes.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};
struct UnsupportedError : std::runtime_error {
  explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};
struct DegenerateInputError : std::invalid_argument {
  explicit DegenerateInputError(const std::string& msg)
      : std::invalid_argument(msg) {}
};
struct StateError : std::logic_error {
  explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};
struct UndefinedMetricError : std::invalid_argument {
  explicit UndefinedMetricError(const std::string& msg)
      : std::invalid_argument(msg) {}
};
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

// Dense row-major matrix of doubles. Small on purpose: the library only
// needs storage, indexing and a few bulk helpers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Deterministic RNG. Wraps mt19937_64 with hand-rolled mappings so that
// streams are bit-reproducible across platforms and standard libraries
// (std::normal_distribution is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64; passes through mt19937-free path for speed and portability.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Fisher-Yates shuffle, deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream for a named subtask. Used to seed
  // per-channel / per-fold work so parallel order cannot matter.
  std::uint64_t fork(std::uint64_t salt) {
    std::uint64_t z = state_ ^ (0xd1342543de82ef95ULL * (salt + 1));
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    return z ^ (z >> 33);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Static-partition parallel for. Each worker writes only to indices it owns,
// so results are independent of scheduling; callers must keep body(i) free of
// shared mutable state.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = hw == 0 ? 1 : hw;
  if (workers > n) workers = n;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace casa

#endif  // CASA_COMMON_HPP
