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

#ifndef VBMTL_MANIFEST_HPP_
#define VBMTL_MANIFEST_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "vbmtl/json_io.hpp"

namespace vbmtl {

// SHA-1 over "blob <size>\0<content>", i.e. what `git hash-object` prints.
std::string GitBlobHash(std::string_view content);
std::string GitBlobHashFile(const std::filesystem::path& path);

// Run manifest: the training config, a content hash per named input file,
// and the final metrics.
json MakeRunManifest(const TrainConfig& config,
                     const std::map<std::string, std::filesystem::path>& inputs,
                     const json& metrics);

}  // namespace vbmtl

#endif  // VBMTL_MANIFEST_HPP_
