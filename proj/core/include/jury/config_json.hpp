// Copyright 2026 The JuryLearn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON mapping for configuration types. Parsing keeps defaults for absent
// keys and rejects unknown keys.

#ifndef JURY_CONFIG_JSON_HPP_
#define JURY_CONFIG_JSON_HPP_

#include <filesystem>

#include "json.hpp"
#include "jury/encoder.hpp"
#include "jury/model.hpp"
#include "jury/synthetic.hpp"

namespace jury {

using Json = nlohmann::json;

void to_json(Json& j, const ContentEncoderConfig& c);
void from_json(const Json& j, ContentEncoderConfig& c);
void to_json(Json& j, const ModelConfig& c);
void from_json(const Json& j, ModelConfig& c);
void to_json(Json& j, const TrainConfig& c);
void from_json(const Json& j, TrainConfig& c);
void to_json(Json& j, const TrainingMetadata& m);
void from_json(const Json& j, TrainingMetadata& m);
void to_json(Json& j, const GroupEffect& e);
void from_json(const Json& j, GroupEffect& e);
void to_json(Json& j, const SyntheticSpec& s);
void from_json(const Json& j, SyntheticSpec& s);

// Throws InvalidArgument naming `context` on keys outside `allowed`.
void RejectUnknownKeys(const Json& j, std::initializer_list<const char*> allowed,
                       const char* context);

// Reads a whole JSON document; IoError names the path.
Json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const Json& j);

}  // namespace jury

#endif  // JURY_CONFIG_JSON_HPP_
