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

#ifndef VBMTL_CHECKPOINT_HPP_
#define VBMTL_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "vbmtl/data.hpp"
#include "vbmtl/model.hpp"

namespace vbmtl {

// Everything needed to score raw features with a trained model.
struct Checkpoint {
  ModelConfig config;
  AgeScaler age_scaler;
  Standardizer standardizer;
  ModelParams params;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Binary layout, all integers and floats little-endian:
//   "PMTC" | u16 version=1 | u32 header_len | header (UTF-8 JSON: model
//   config, standardization mode, constant feature indices) |
//   u32 tensor_count | tensor_count x (u32 name_len, name, u32 rows,
//   u32 cols, rows*cols float64)
// Tensors: every ModelParams entry under its ForEach name, then
// "age_scaler" (1x2: mean, std) and, unless the mode is "none",
// "standardizer.offset" and "standardizer.scale" (1 x d).
std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint DeserializeCheckpoint(std::string_view bytes, const std::string& source);

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace vbmtl

#endif  // VBMTL_CHECKPOINT_HPP_
