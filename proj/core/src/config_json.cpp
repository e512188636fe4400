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

#include "jury/config_json.hpp"

#include <fstream>
#include <sstream>

#include "jury/error.hpp"

namespace jury {

namespace {

template <typename T>
void Get(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad value for '") + key + "'", e.what());
  }
}

void RequireObject(const Json& j, const char* context) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(context) + " must be a JSON object");
  }
}

}  // namespace

void RejectUnknownKeys(const Json& j, std::initializer_list<const char*> allowed,
                       const char* context) {
  RequireObject(j, context);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument, std::string("unknown key in ") + context, key);
    }
  }
}

void to_json(Json& j, const ContentEncoderConfig& c) {
  j = Json{{"kind", c.kind == EncoderKind::kPrecomputed ? "precomputed" : "hashed_bow"},
           {"dim", c.dim},
           {"buckets", c.buckets},
           {"trainable", c.trainable}};
}

void from_json(const Json& j, ContentEncoderConfig& c) {
  RejectUnknownKeys(j, {"kind", "dim", "buckets", "trainable"}, "encoder config");
  std::string kind = c.kind == EncoderKind::kPrecomputed ? "precomputed" : "hashed_bow";
  Get(j, "kind", kind);
  if (kind == "precomputed") {
    c.kind = EncoderKind::kPrecomputed;
  } else if (kind == "hashed_bow") {
    c.kind = EncoderKind::kHashedBow;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown encoder kind", kind);
  }
  Get(j, "dim", c.dim);
  Get(j, "buckets", c.buckets);
  Get(j, "trainable", c.trainable);
}

void to_json(Json& j, const ModelConfig& c) {
  j = Json{{"embedding_dim", c.embedding_dim},
           {"cross_layers", c.cross_layers},
           {"deep_layers", c.deep_layers},
           {"include_annotator_id", c.include_annotator_id},
           {"include_groups", c.include_groups},
           {"encoder", c.encoder}};
}

void from_json(const Json& j, ModelConfig& c) {
  RejectUnknownKeys(j, {"embedding_dim", "cross_layers", "deep_layers", "include_annotator_id",
                        "include_groups", "encoder"},
                    "model config");
  Get(j, "embedding_dim", c.embedding_dim);
  Get(j, "cross_layers", c.cross_layers);
  Get(j, "deep_layers", c.deep_layers);
  Get(j, "include_annotator_id", c.include_annotator_id);
  Get(j, "include_groups", c.include_groups);
  Get(j, "encoder", c.encoder);
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"lr_dense", c.lr_dense},
           {"lr_embedding", c.lr_embedding},
           {"lr_encoder", c.lr_encoder},
           {"batch_size", c.batch_size},
           {"joint_epochs", c.joint_epochs},
           {"frozen_epochs", c.frozen_epochs},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"epsilon", c.epsilon},
           {"unknown_substitution_rate", c.unknown_substitution_rate},
           {"seed", c.seed}};
}

void from_json(const Json& j, TrainConfig& c) {
  RejectUnknownKeys(j, {"lr_dense", "lr_embedding", "lr_encoder", "batch_size", "joint_epochs",
                        "frozen_epochs", "beta1", "beta2", "epsilon",
                        "unknown_substitution_rate", "seed"},
                    "train config");
  Get(j, "lr_dense", c.lr_dense);
  Get(j, "lr_embedding", c.lr_embedding);
  Get(j, "lr_encoder", c.lr_encoder);
  Get(j, "batch_size", c.batch_size);
  Get(j, "joint_epochs", c.joint_epochs);
  Get(j, "frozen_epochs", c.frozen_epochs);
  Get(j, "beta1", c.beta1);
  Get(j, "beta2", c.beta2);
  Get(j, "epsilon", c.epsilon);
  Get(j, "unknown_substitution_rate", c.unknown_substitution_rate);
  Get(j, "seed", c.seed);
}

void to_json(Json& j, const TrainingMetadata& m) {
  j = Json{{"epochs_run", m.epochs_run},
           {"steps", m.steps},
           {"initial_loss", m.initial_loss},
           {"epoch_losses", m.epoch_losses},
           {"encoder_frozen", m.encoder_frozen}};
}

void from_json(const Json& j, TrainingMetadata& m) {
  Get(j, "epochs_run", m.epochs_run);
  Get(j, "steps", m.steps);
  Get(j, "initial_loss", m.initial_loss);
  Get(j, "epoch_losses", m.epoch_losses);
  Get(j, "encoder_frozen", m.encoder_frozen);
}

void to_json(Json& j, const GroupEffect& e) {
  j = Json{{"attribute", e.attribute},
           {"value", e.value},
           {"offset", e.offset},
           {"topic_only", e.topic_only}};
}

void from_json(const Json& j, GroupEffect& e) {
  RejectUnknownKeys(j, {"attribute", "value", "offset", "topic_only"}, "group effect");
  Get(j, "attribute", e.attribute);
  Get(j, "value", e.value);
  Get(j, "offset", e.offset);
  Get(j, "topic_only", e.topic_only);
}

void to_json(Json& j, const SyntheticSpec& s) {
  j = Json{{"attribute_values", s.attribute_values},
           {"value_weights", s.value_weights},
           {"group_effects", s.group_effects},
           {"annotator_sigma", s.annotator_sigma},
           {"item_base_mean", s.item_base_mean},
           {"item_base_scale", s.item_base_scale},
           {"observation_sigma", s.observation_sigma},
           {"n_items", s.n_items},
           {"n_annotators", s.n_annotators},
           {"labels_per_item", s.labels_per_item},
           {"vocab_size", s.vocab_size},
           {"tokens_per_item", s.tokens_per_item},
           {"topic_fraction", s.topic_fraction},
           {"topic_token", s.topic_token},
           {"embedding_dim", s.embedding_dim},
           {"seed", s.seed}};
}

void from_json(const Json& j, SyntheticSpec& s) {
  RejectUnknownKeys(j, {"attribute_values", "value_weights", "group_effects", "annotator_sigma",
                        "item_base_mean", "item_base_scale", "observation_sigma", "n_items",
                        "n_annotators", "labels_per_item", "vocab_size", "tokens_per_item",
                        "topic_fraction", "topic_token", "embedding_dim", "seed"},
                    "synthetic spec");
  Get(j, "attribute_values", s.attribute_values);
  Get(j, "value_weights", s.value_weights);
  Get(j, "group_effects", s.group_effects);
  Get(j, "annotator_sigma", s.annotator_sigma);
  Get(j, "item_base_mean", s.item_base_mean);
  Get(j, "item_base_scale", s.item_base_scale);
  Get(j, "observation_sigma", s.observation_sigma);
  Get(j, "n_items", s.n_items);
  Get(j, "n_annotators", s.n_annotators);
  Get(j, "labels_per_item", s.labels_per_item);
  Get(j, "vocab_size", s.vocab_size);
  Get(j, "tokens_per_item", s.tokens_per_item);
  Get(j, "topic_fraction", s.topic_fraction);
  Get(j, "topic_token", s.topic_token);
  Get(j, "embedding_dim", s.embedding_dim);
  Get(j, "seed", s.seed);
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "invalid JSON in " + path.string(), e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write file", path.string());
  out << j.dump(2) << '\n';
}

}  // namespace jury
