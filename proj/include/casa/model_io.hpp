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

#ifndef CASA_MODEL_IO_HPP
#define CASA_MODEL_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "casa/common.hpp"
#include "casa/neural.hpp"

namespace casa {

// Versioned binary container for model parameters: ordered key/value records
// with shape headers and little-endian 64-bit floats. Keys are dotted paths
// ("mask.ch03.mlp.w0"). Map ordering makes serialization byte-deterministic.
class ModelBundle {
 public:
  void put_tensor(const std::string& key, Tensor t);
  void put_matrix(const std::string& key, const Matrix& m);
  void put_vector(const std::string& key, const std::vector<double>& v);
  void put_scalar(const std::string& key, double v);
  void put_int(const std::string& key, std::int64_t v);
  void put_string(const std::string& key, const std::string& v);

  const Tensor& tensor(const std::string& key) const;
  Matrix matrix(const std::string& key) const;
  std::vector<double> vector(const std::string& key) const;
  double scalar(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& str(const std::string& key) const;

  bool has(const std::string& key) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void save(const std::string& path) const;
  static ModelBundle load(const std::string& path);

  // Human-readable inspection dump.
  void export_json(const std::string& path, bool include_data = false) const;

 private:
  struct Record {
    std::uint8_t tag = 0;  // 0 tensor, 1 f64, 2 i64, 3 string
    Tensor tensor;
    double f64 = 0.0;
    std::int64_t i64 = 0;
    std::string text;
  };
  std::map<std::string, Record> records_;
};

}  // namespace casa

#endif  // CASA_MODEL_IO_HPP
