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

#ifndef VBMTL_JSON_IO_HPP_
#define VBMTL_JSON_IO_HPP_

// nlohmann::json conversions for the configuration and result types. Reading
// is partial: absent keys keep their defaults, unknown keys are rejected.

#include <json.hpp>

#include "vbmtl/loss.hpp"
#include "vbmtl/metrics.hpp"
#include "vbmtl/model.hpp"
#include "vbmtl/synth.hpp"
#include "vbmtl/train.hpp"

namespace vbmtl {

using json = nlohmann::json;

void to_json(json& j, const ModelConfig& c);
void from_json(const json& j, ModelConfig& c);
void to_json(json& j, const LossConfig& c);
void from_json(const json& j, LossConfig& c);
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);
void to_json(json& j, const SynthSpec& s);
void from_json(const json& j, SynthSpec& s);
void to_json(json& j, const AgeScaler& s);
void from_json(const json& j, AgeScaler& s);

void to_json(json& j, const LossBreakdown& l);
void to_json(json& j, const MetricsBundle& m);
void from_json(const json& j, MetricsBundle& m);
// Every recorded number except wall-clock times, which vary between runs.
void to_json(json& j, const RunHistory& h);

// Throws ConfigError if `j` is not an object or has keys outside `allowed`.
void RequireKeys(const json& j, std::initializer_list<const char*> allowed,
                 const char* context);

}  // namespace vbmtl

#endif  // VBMTL_JSON_IO_HPP_
