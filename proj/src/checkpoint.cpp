/*
 * Copyright 2026 The vbmtl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vbmtl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>

#include "vbmtl/error.hpp"
#include "vbmtl/json_io.hpp"
#include "vbmtl/rng.hpp"

namespace vbmtl {

namespace {

constexpr std::string_view kMagic = "PMTC";
constexpr std::uint16_t kVersion = 1;

template <typename T>
void Put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(value & 0xFF));
    value = static_cast<T>(value >> 8);
  }
}

void PutTensor(std::string& out, const std::string& name, const Matrix& m) {
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) Put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;)
      v = static_cast<T>((v << 8) | static_cast<unsigned char>(bytes_[pos_ + i]));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view Take(std::size_t n) {
    Need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError(source_ + ": truncated checkpoint");
  }
  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  json header = {{"model", ckpt.config},
                 {"standardization", ToString(ckpt.standardizer.mode)},
                 {"constant_features", ckpt.standardizer.constant_features}};
  const std::string header_text = header.dump();

  std::string out(kMagic);
  Put<std::uint16_t>(out, kVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;

  std::uint32_t count = 1;
  ckpt.params.ForEach([&count](const std::string&, const Matrix&) { ++count; });
  if (!ckpt.standardizer.identity()) count += 2;
  Put<std::uint32_t>(out, count);
  ckpt.params.ForEach(
      [&out](const std::string& name, const Matrix& m) { PutTensor(out, name, m); });
  PutTensor(out, "age_scaler", Matrix(1, 2, {ckpt.age_scaler.mean, ckpt.age_scaler.std}));
  if (!ckpt.standardizer.identity()) {
    PutTensor(out, "standardizer.offset", Matrix::RowVector(ckpt.standardizer.offset));
    PutTensor(out, "standardizer.scale", Matrix::RowVector(ckpt.standardizer.scale));
  }
  return out;
}

Checkpoint DeserializeCheckpoint(std::string_view bytes, const std::string& source) {
  Reader r(bytes, source);
  if (r.Take(kMagic.size()) != kMagic) throw DataError(source + ": not a checkpoint");
  const auto version = r.Get<std::uint16_t>();
  if (version != kVersion)
    throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
  const auto header_len = r.Get<std::uint32_t>();
  Checkpoint ckpt;
  try {
    const json header = json::parse(r.Take(header_len));
    ckpt.config = header.at("model").get<ModelConfig>();
    ckpt.standardizer.mode = ParseStandardization(header.at("standardization").get<std::string>());
    ckpt.standardizer.constant_features =
        header.at("constant_features").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw DataError(source + ": bad checkpoint header: " + e.what());
  }

  std::map<std::string, Matrix> tensors;
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.Get<std::uint32_t>();
    std::string name(r.Take(name_len));
    const auto rows = r.Get<std::uint32_t>();
    const auto cols = r.Get<std::uint32_t>();
    std::vector<double> values(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) v = std::bit_cast<double>(r.Get<std::uint64_t>());
    tensors.emplace(std::move(name), Matrix(rows, cols, std::move(values)));
  }
  if (!r.done()) throw DataError(source + ": trailing bytes after checkpoint");

  auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError(source + ": missing tensor " + name);
    Matrix m = std::move(it->second);
    tensors.erase(it);
    return m;
  };

  // Layout comes from the config; values from the stored tensors.
  RngStream unused(0);
  ckpt.params = InitParams(ckpt.config, unused);
  ckpt.params.ForEach([&](const std::string& name, Matrix& m) {
    Matrix stored = take(name);
    if (stored.rows() != m.rows() || stored.cols() != m.cols())
      throw DataError(source + ": tensor " + name + " has shape " + stored.ShapeString() +
                      ", config implies " + m.ShapeString());
    m = std::move(stored);
  });
  const Matrix scaler = take("age_scaler");
  if (scaler.size() != 2) throw DataError(source + ": malformed age_scaler tensor");
  ckpt.age_scaler = {scaler(0, 0), scaler(0, 1)};
  if (!ckpt.standardizer.identity()) {
    const auto offset = take("standardizer.offset");
    const auto scale = take("standardizer.scale");
    ckpt.standardizer.offset.assign(offset.values().begin(), offset.values().end());
    ckpt.standardizer.scale.assign(scale.values().begin(), scale.values().end());
  }
  if (!tensors.empty())
    throw DataError(source + ": unexpected tensor " + tensors.begin()->first);
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = SerializeCheckpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes, path.string());
}

}  // namespace vbmtl
