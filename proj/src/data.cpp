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

#include "vbmtl/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "vbmtl/error.hpp"

namespace vbmtl {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'T', 'L'};
constexpr std::uint16_t kBinaryVersion = 1;

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool ReadLine(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

[[noreturn]] void Fail(const std::string& source, std::size_t line_no,
                       const std::string& msg) {
  throw DataError(source + ":" + std::to_string(line_no) + ": " + msg);
}

double ParseFinite(std::string_view text, const std::string& source,
                   std::size_t line_no) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    Fail(source, line_no, "cannot parse number '" + std::string(text) + "'");
  if (!std::isfinite(v)) Fail(source, line_no, "non-finite value '" + std::string(text) + "'");
  return v;
}

std::ifstream OpenIn(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, std::ios::in | mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream OpenOut(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void RequireUniqueIds(const std::vector<std::string>& ids, const std::string& source) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw DataError(source + ": duplicate id '" + id + "'");
}

template <typename T>
void PutLE(std::ostream& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xFF);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes, sizeof(T));
}

template <typename T>
T GetLE(std::istream& in, const std::string& source) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError(source + ": truncated binary feature file");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;)
    u = static_cast<std::make_unsigned_t<T>>((u << 8) | bytes[i]);
  return static_cast<T>(u);
}

std::string EmotionHeader() {
  std::string h;
  for (auto name : kEmotionNames) {
    h += ',';
    h += name;
  }
  return h;
}

std::string LabelsHeader() { return "id" + EmotionHeader() + ",age,country"; }

// Lexicographic permutation of ids.
std::vector<std::size_t> SortedOrder(const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&ids](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return order;
}

}  // namespace

int ParseCountry(std::string_view token) {
  for (std::size_t i = 0; i < kCountryTokens.size(); ++i)
    if (kCountryTokens[i] == token) return static_cast<int>(i);
  throw DataError("unknown country '" + std::string(token) + "'");
}

std::string_view CountryToken(int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= kCountryTokens.size())
    throw DataError("country id " + std::to_string(id) + " out of range");
  return kCountryTokens[static_cast<std::size_t>(id)];
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

FeatureTable ParseFeaturesCsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!ReadLine(in, line)) throw DataError(source + ": empty feature file");
  const auto header = SplitCommas(line);
  if (header.size() < 2 || header[0] != "id")
    Fail(source, 1, "header must be id,f0,...,f{d-1}");
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j)
    if (header[j + 1] != "f" + std::to_string(j))
      Fail(source, 1, "expected column f" + std::to_string(j) + ", found '" +
                          std::string(header[j + 1]) + "'");

  FeatureTable table;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (ReadLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCommas(line);
    if (fields.size() != d + 1)
      Fail(source, line_no, "row has " + std::to_string(fields.size() - 1) +
                                " features, header declares " + std::to_string(d));
    if (fields[0].empty()) Fail(source, line_no, "empty id");
    table.ids.emplace_back(fields[0]);
    for (std::size_t j = 1; j <= d; ++j)
      values.push_back(ParseFinite(fields[j], source, line_no));
  }
  RequireUniqueIds(table.ids, source);
  table.features = Matrix(table.ids.size(), d, std::move(values));
  return table;
}

FeatureTable ParseFeaturesBinary(std::istream& in, const std::string& source) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic))
    throw DataError(source + ": missing PMTL magic");
  const auto version = GetLE<std::uint16_t>(in, source);
  if (version != kBinaryVersion)
    throw DataError(source + ": unsupported binary version " + std::to_string(version));
  const auto n = GetLE<std::uint32_t>(in, source);
  const auto d = GetLE<std::uint32_t>(in, source);
  FeatureTable table;
  table.ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = GetLE<std::uint32_t>(in, source);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw DataError(source + ": truncated id table");
    table.ids.push_back(std::move(id));
  }
  std::vector<double> values(static_cast<std::size_t>(n) * d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<double>(GetLE<std::uint64_t>(in, source));
    if (!std::isfinite(values[i]))
      throw DataError(source + ": non-finite value in row " + std::to_string(i / d) +
                      " (id '" + table.ids[i / d] + "')");
  }
  RequireUniqueIds(table.ids, source);
  table.features = Matrix(n, d, std::move(values));
  return table;
}

FeatureTable LoadFeatures(const std::filesystem::path& path) {
  auto in = OpenIn(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::equal(magic, magic + 4, kMagic);
  in.clear();
  in.seekg(0);
  return binary ? ParseFeaturesBinary(in, path.string())
                : ParseFeaturesCsv(in, path.string());
}

void SaveFeaturesCsv(const FeatureTable& table, const std::filesystem::path& path) {
  auto out = OpenOut(path);
  out << "id";
  for (std::size_t j = 0; j < table.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out << table.ids[i];
    for (double v : table.features.row(i)) out << ',' << FormatDouble(v);
    out << '\n';
  }
}

void SaveFeaturesBinary(const FeatureTable& table, const std::filesystem::path& path) {
  auto out = OpenOut(path, std::ios::binary);
  out.write(kMagic, 4);
  PutLE<std::uint16_t>(out, kBinaryVersion);
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(table.ids.size()));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim()));
  for (const auto& id : table.ids) {
    PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (double v : table.features.values())
    PutLE<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
}

LabelTable ParseLabelsCsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!ReadLine(in, line)) throw DataError(source + ": empty label file");
  if (line != LabelsHeader()) Fail(source, 1, "header must be " + LabelsHeader());

  LabelTable table;
  std::vector<double> emotion;
  std::size_t line_no = 1;
  while (ReadLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCommas(line);
    if (fields.size() != kNumEmotions + 3)
      Fail(source, line_no, "expected " + std::to_string(kNumEmotions + 3) +
                                " fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) Fail(source, line_no, "empty id");
    table.ids.emplace_back(fields[0]);
    for (std::size_t j = 0; j < kNumEmotions; ++j) {
      const double v = ParseFinite(fields[j + 1], source, line_no);
      if (v < 0.0 || v > 1.0)
        Fail(source, line_no, std::string(kEmotionNames[j]) + " outside [0, 1]");
      emotion.push_back(v);
    }
    const auto age_text = fields[kNumEmotions + 1];
    int age = 0;
    const auto [ptr, ec] =
        std::from_chars(age_text.data(), age_text.data() + age_text.size(), age);
    if (ec != std::errc() || ptr != age_text.data() + age_text.size() || age_text.empty())
      Fail(source, line_no, "age must be an integer, found '" + std::string(age_text) + "'");
    table.age.push_back(age);
    try {
      table.country.push_back(ParseCountry(fields[kNumEmotions + 2]));
    } catch (const DataError& e) {
      Fail(source, line_no, e.what());
    }
  }
  RequireUniqueIds(table.ids, source);
  table.emotion = Matrix(table.ids.size(), kNumEmotions, std::move(emotion));
  return table;
}

LabelTable LoadLabels(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  return ParseLabelsCsv(in, path.string());
}

void SaveLabelsCsv(const LabelTable& table, const std::filesystem::path& path) {
  auto out = OpenOut(path);
  out << LabelsHeader() << '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out << table.ids[i];
    for (double v : table.emotion.row(i)) out << ',' << FormatDouble(v);
    out << ',' << table.age[i] << ',' << CountryToken(table.country[i]) << '\n';
  }
}

BatchTargets Partition::Targets(std::span<const std::size_t> rows,
                                 const AgeScaler& scaler) const {
  if (!labeled) throw DataError("targets requested for an unlabeled partition");
  BatchTargets t{emotion.GatherRows(rows), Matrix(rows.size(), 1), {}};
  t.country.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.age_scaled(i, 0) = scaler.Scale(age_years[rows[i]]);
    t.country.push_back(country[rows[i]]);
  }
  return t;
}

const char* ToString(Standardization s) {
  switch (s) {
    case Standardization::kNone: return "none";
    case Standardization::kZScore: return "zscore";
    case Standardization::kMinMax: return "minmax";
  }
  return "none";
}

Standardization ParseStandardization(const std::string& s) {
  if (s == "none") return Standardization::kNone;
  if (s == "zscore") return Standardization::kZScore;
  if (s == "minmax") return Standardization::kMinMax;
  throw ConfigError("unknown standardization '" + s + "'");
}

Matrix Standardizer::Apply(const Matrix& x) const {
  if (identity()) return x;
  if (x.cols() != offset.size())
    throw ShapeError("standardizer fit on " + std::to_string(offset.size()) +
                     " features, applied to " + std::to_string(x.cols()));
  Matrix y = x;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - offset[j]) / scale[j];
  }
  return y;
}

namespace {

Partition MakePartition(const FeatureTable& features, const LabelTable& labels,
                        const std::unordered_map<std::string, std::size_t>& label_index,
                        bool require_labels, const char* split_name) {
  Partition p;
  const auto order = SortedOrder(features.ids);
  p.ids.reserve(order.size());
  for (auto i : order) p.ids.push_back(features.ids[i]);
  p.features = features.features.GatherRows(order);

  std::vector<std::string> missing;
  for (const auto& id : p.ids)
    if (!label_index.contains(id)) missing.push_back(id);
  if (!missing.empty()) {
    if (!require_labels) return p;
    std::ostringstream os;
    os << split_name << " split: " << missing.size() << " id(s) without labels:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) os << ' ' << missing[i];
    if (missing.size() > 20) os << " ...";
    throw DataError(os.str());
  }

  std::vector<std::size_t> label_rows;
  label_rows.reserve(p.ids.size());
  for (const auto& id : p.ids) label_rows.push_back(label_index.at(id));
  p.emotion = labels.emotion.GatherRows(label_rows);
  for (auto r : label_rows) {
    p.age_years.push_back(static_cast<double>(labels.age[r]));
    p.country.push_back(labels.country[r]);
  }
  p.labeled = true;
  return p;
}

}  // namespace

AgeScaler FitAgeScaler(std::span<const double> ages) {
  if (ages.empty()) throw DataError("cannot fit age scaler on an empty split");
  double mean = 0.0;
  for (double a : ages) mean += a;
  mean /= static_cast<double>(ages.size());
  double var = 0.0;
  for (double a : ages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(ages.size());
  const double sd = std::sqrt(var);
  return {mean, sd > 0.0 ? sd : 1.0};
}

SplitDataset JoinSplits(const FeatureTable& train, const FeatureTable& val,
                        const std::optional<FeatureTable>& test,
                        const LabelTable& labels) {
  if (train.ids.empty()) throw DataError("train split is empty");
  if (val.dim() != train.dim() && !val.ids.empty())
    throw DataError("val features have dim " + std::to_string(val.dim()) +
                    ", train has " + std::to_string(train.dim()));
  if (test && !test->ids.empty() && test->dim() != train.dim())
    throw DataError("test features have dim " + std::to_string(test->dim()) +
                    ", train has " + std::to_string(train.dim()));

  std::set<std::string> seen;
  auto claim = [&seen](const FeatureTable& t, const char* name) {
    for (const auto& id : t.ids)
      if (!seen.insert(id).second)
        throw DataError(std::string("id '") + id + "' appears in more than one split (" +
                        name + ")");
  };
  claim(train, "train");
  claim(val, "val");
  if (test) claim(*test, "test");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) index.emplace(labels.ids[i], i);

  SplitDataset ds;
  ds.train = MakePartition(train, labels, index, true, "train");
  ds.val = MakePartition(val, labels, index, true, "val");
  if (test) {
    ds.test = MakePartition(*test, labels, index, false, "test");
  } else {
    ds.test.features = Matrix(0, train.dim());
  }
  ds.age_scaler = FitAgeScaler(ds.train.age_years);
  return ds;
}

SplitDataset Standardize(SplitDataset data, Standardization mode) {
  Standardizer s;
  s.mode = mode;
  if (mode != Standardization::kNone) {
    const Matrix& x = data.train.features;
    if (x.rows() == 0) throw DataError("cannot standardize: train split is empty");
    const std::size_t d = x.cols();
    s.offset.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t j = 0; j < d; ++j) {
      double spread = 0.0;
      if (mode == Standardization::kZScore) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        s.offset[j] = mean;
        spread = std::sqrt(var / n);
      } else {
        double lo = x(0, j), hi = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) {
          lo = std::min(lo, x(i, j));
          hi = std::max(hi, x(i, j));
        }
        s.offset[j] = lo + (hi - lo) / 2.0;
        spread = (hi - lo) / 2.0;
      }
      if (spread > 0.0) {
        s.scale[j] = spread;
      } else {
        s.constant_features.push_back(j);
      }
    }
  }
  data.train.features = s.Apply(data.train.features);
  data.val.features = s.Apply(data.val.features);
  if (data.test.size() > 0) data.test.features = s.Apply(data.test.features);
  data.standardizer = std::move(s);
  return data;
}

std::vector<std::vector<std::size_t>> Batches(std::size_t n, std::size_t batch_size,
                                              RngStream& rng) {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

PredictionTable MakePredictionTable(const std::vector<std::string>& ids,
                                    const PredictionSet& predictions) {
  if (ids.size() != predictions.country.size())
    throw ShapeError("prediction table: id count does not match predictions");
  return {ids, predictions.emotion, predictions.age_years, predictions.country};
}

void SavePredictionsCsv(const PredictionTable& table, const std::filesystem::path& path) {
  auto out = OpenOut(path);
  out << LabelsHeader() << '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out << table.ids[i];
    for (double v : table.emotion.row(i)) out << ',' << FormatDouble(v);
    out << ',' << FormatDouble(table.age_years[i]) << ','
        << CountryToken(table.country[i]) << '\n';
  }
}

PredictionTable LoadPredictionsCsv(const std::filesystem::path& path) {
  auto in = OpenIn(path);
  const std::string source = path.string();
  std::string line;
  if (!ReadLine(in, line)) throw DataError(source + ": empty predictions file");
  if (line != LabelsHeader()) Fail(source, 1, "header must be " + LabelsHeader());
  PredictionTable table;
  std::vector<double> emotion;
  std::size_t line_no = 1;
  while (ReadLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCommas(line);
    if (fields.size() != kNumEmotions + 3)
      Fail(source, line_no, "expected " + std::to_string(kNumEmotions + 3) + " fields");
    table.ids.emplace_back(fields[0]);
    for (std::size_t j = 0; j < kNumEmotions; ++j)
      emotion.push_back(ParseFinite(fields[j + 1], source, line_no));
    table.age_years.push_back(ParseFinite(fields[kNumEmotions + 1], source, line_no));
    try {
      table.country.push_back(ParseCountry(fields[kNumEmotions + 2]));
    } catch (const DataError& e) {
      Fail(source, line_no, e.what());
    }
  }
  RequireUniqueIds(table.ids, source);
  table.emotion = Matrix(table.ids.size(), kNumEmotions, std::move(emotion));
  return table;
}

}  // namespace vbmtl
