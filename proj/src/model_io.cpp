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

#include "casa/model_io.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace casa {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'S', 'A', 'B', 'N', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void ModelBundle::put_tensor(const std::string& key, Tensor t) {
  Record r;
  r.tag = 0;
  r.tensor = std::move(t);
  records_[key] = std::move(r);
}

void ModelBundle::put_matrix(const std::string& key, const Matrix& m) {
  Tensor t({m.rows(), m.cols()});
  t.data = m.data();
  put_tensor(key, std::move(t));
}

void ModelBundle::put_vector(const std::string& key, const std::vector<double>& v) {
  Tensor t({v.size()});
  t.data = v;
  put_tensor(key, std::move(t));
}

void ModelBundle::put_scalar(const std::string& key, double v) {
  Record r;
  r.tag = 1;
  r.f64 = v;
  records_[key] = std::move(r);
}

void ModelBundle::put_int(const std::string& key, std::int64_t v) {
  Record r;
  r.tag = 2;
  r.i64 = v;
  records_[key] = std::move(r);
}

void ModelBundle::put_string(const std::string& key, const std::string& v) {
  Record r;
  r.tag = 3;
  r.text = v;
  records_[key] = std::move(r);
}

const Tensor& ModelBundle::tensor(const std::string& key) const {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.tag != 0)
    throw FormatError("bundle: missing tensor " + key);
  return it->second.tensor;
}

Matrix ModelBundle::matrix(const std::string& key) const {
  const Tensor& t = tensor(key);
  if (t.shape.size() != 2) throw FormatError("bundle: " + key + " is not 2-d");
  Matrix m(t.shape[0], t.shape[1]);
  m.data() = t.data;
  return m;
}

std::vector<double> ModelBundle::vector(const std::string& key) const {
  const Tensor& t = tensor(key);
  if (t.shape.size() != 1) throw FormatError("bundle: " + key + " is not 1-d");
  return t.data;
}

double ModelBundle::scalar(const std::string& key) const {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.tag != 1)
    throw FormatError("bundle: missing scalar " + key);
  return it->second.f64;
}

std::int64_t ModelBundle::integer(const std::string& key) const {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.tag != 2)
    throw FormatError("bundle: missing integer " + key);
  return it->second.i64;
}

const std::string& ModelBundle::str(const std::string& key) const {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.tag != 3)
    throw FormatError("bundle: missing string " + key);
  return it->second.text;
}

bool ModelBundle::has(const std::string& key) const {
  return records_.count(key) != 0;
}

std::vector<std::string> ModelBundle::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : records_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void ModelBundle::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("bundle: cannot open " + path + " for writing");
  os.write(kMagic, 8);
  put_u32(os, kVersion);
  put_u64(os, records_.size());
  for (const auto& [key, rec] : records_) {
    put_u32(os, static_cast<std::uint32_t>(key.size()));
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    os.put(static_cast<char>(rec.tag));
    switch (rec.tag) {
      case 0: {
        put_u32(os, static_cast<std::uint32_t>(rec.tensor.shape.size()));
        for (auto d : rec.tensor.shape) put_u64(os, d);
        for (double v : rec.tensor.data) put_f64(os, v);
        break;
      }
      case 1:
        put_f64(os, rec.f64);
        break;
      case 2:
        put_u64(os, static_cast<std::uint64_t>(rec.i64));
        break;
      case 3:
        put_u64(os, rec.text.size());
        os.write(rec.text.data(), static_cast<std::streamsize>(rec.text.size()));
        break;
    }
  }
  if (!os) throw FormatError("bundle: write failed for " + path);
}

ModelBundle ModelBundle::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("bundle: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("bundle: bad magic in " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw UnsupportedError("bundle: unknown version");
  const std::uint64_t n = get_u64(is);
  ModelBundle bundle;
  for (std::uint64_t r = 0; r < n; ++r) {
    const std::uint32_t keylen = get_u32(is);
    std::string key(keylen, '\0');
    is.read(key.data(), keylen);
    const int tag = is.get();
    Record rec;
    rec.tag = static_cast<std::uint8_t>(tag);
    switch (tag) {
      case 0: {
        const std::uint32_t ndim = get_u32(is);
        std::vector<std::size_t> shape(ndim);
        std::size_t total = 1;
        for (auto& d : shape) {
          d = static_cast<std::size_t>(get_u64(is));
          total *= d;
        }
        rec.tensor.shape = std::move(shape);
        rec.tensor.data.resize(total);
        for (auto& v : rec.tensor.data) v = get_f64(is);
        break;
      }
      case 1:
        rec.f64 = get_f64(is);
        break;
      case 2:
        rec.i64 = static_cast<std::int64_t>(get_u64(is));
        break;
      case 3: {
        const std::uint64_t len = get_u64(is);
        rec.text.resize(len);
        is.read(rec.text.data(), static_cast<std::streamsize>(len));
        break;
      }
      default:
        throw FormatError("bundle: unknown record tag in " + path);
    }
    if (!is) throw FormatError("bundle: truncated file " + path);
    bundle.records_[key] = std::move(rec);
  }
  return bundle;
}

void ModelBundle::export_json(const std::string& path, bool include_data) const {
  nlohmann::json j;
  for (const auto& [key, rec] : records_) {
    switch (rec.tag) {
      case 0: {
        nlohmann::json t;
        t["shape"] = rec.tensor.shape;
        if (include_data)
          t["data"] = rec.tensor.data;
        else
          t["elements"] = rec.tensor.data.size();
        j[key] = t;
        break;
      }
      case 1:
        j[key] = rec.f64;
        break;
      case 2:
        j[key] = rec.i64;
        break;
      case 3:
        j[key] = rec.text;
        break;
    }
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("bundle: cannot open " + path);
  os << j.dump(2) << "\n";
}

}  // namespace casa
