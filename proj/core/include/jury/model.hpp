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

#ifndef JURY_MODEL_HPP_
#define JURY_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/encoder.hpp"
#include "jury/tensor.hpp"

namespace jury {

enum class ModelKind { kFull, kGroupOnly, kAggregate };

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

struct ModelConfig {
  std::size_t embedding_dim = 32;
  std::size_t cross_layers = 3;
  std::vector<std::size_t> deep_layers{256, 256, 256};
  bool include_annotator_id = true;
  bool include_groups = true;
  ContentEncoderConfig encoder;

  // content dim + annotator dim * [ids] + attribute count * dim * [groups]
  std::size_t CrossWidth(std::size_t n_attributes) const;
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  // Per-group Adam step sizes.
  double lr_dense = 1e-3;
  double lr_embedding = 1e-3;
  double lr_encoder = 1e-3;
  std::size_t batch_size = 16;
  std::size_t joint_epochs = 2;
  std::size_t frozen_epochs = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Share of training examples whose annotator row is replaced by the
  // "unknown" row, so attribute-only jurors get a trained embedding.
  double unknown_substitution_rate = 0.01;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TrainingMetadata {
  std::size_t epochs_run = 0;
  std::size_t steps = 0;
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;
  bool encoder_frozen = false;

  bool operator==(const TrainingMetadata&) const = default;
};

// Who the prediction is for: a known annotator, a hypothetical juror given
// only by attributes, or both (attributes override the stored profile).
struct PredictionRequest {
  std::optional<std::string> annotator_id;
  std::optional<std::map<std::string, std::string>> attributes;
};

// Embedding rows selected for one prediction.
struct FeatureRows {
  std::size_t annotator_row = 0;
  std::vector<std::size_t> group_rows;
};

class ModelGradients;

// Content, annotator and group embeddings concatenated into x0, then a cross
// network x_{l+1} = x0 * (W_l x_l + b_l) + x_l, a ReLU deep network and a
// linear output unit.
class JuryModel {
 public:
  // Per-forward activations kept for backprop.
  struct Workspace {
    std::vector<std::vector<double>> cross;   // x_0 .. x_L
    std::vector<std::vector<double>> linear;  // W_l x_l + b_l
    std::vector<std::vector<double>> pre;     // deep pre-activations
    std::vector<std::vector<double>> act;     // deep activations; act[0] = x_L
    double output = 0.0;
  };

  JuryModel() = default;

  // Fresh parameters: uniform(+-1/sqrt(fan_in)) for cross/deep/output weights,
  // normal(0, 0.05) for embedding rows and encoder buckets, zero biases, and
  // the output bias set to the mean training target.
  static JuryModel Initialize(const ModelConfig& config, const Dataset& dataset,
                              std::uint64_t seed, ModelKind kind = ModelKind::kFull);

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return kind_; }
  const TrainingMetadata& metadata() const { return metadata_; }
  TrainingMetadata& mutable_metadata() { return metadata_; }

  const ContentEncoder& encoder() const { return encoder_; }
  ContentEncoder& encoder() { return encoder_; }
  void FreezeEncoder() {
    encoder_.set_trainable(false);
    config_.encoder.trainable = false;
  }

  const std::vector<std::string>& annotator_ids() const { return annotator_ids_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<std::vector<std::string>>& attribute_values() const { return values_; }
  std::optional<std::size_t> FindAnnotator(const std::string& id) const;
  std::size_t unknown_annotator_row() const { return annotator_ids_.size(); }
  std::size_t input_width() const { return width_; }

  // Unknown annotators map to the "unknown" row; missing or unseen attribute
  // values map to "undisclosed" or the fallback row.
  FeatureRows Resolve(const PredictionRequest& request) const;
  FeatureRows ResolveAnnotator(std::size_t model_annotator_row) const;

  // Raw (unclamped) score.
  double Forward(const Item& item, const PredictionRequest& request) const;
  double ForwardEncoded(std::span<const double> content, const FeatureRows& rows) const;
  double ForwardEncoded(std::span<const double> content, const FeatureRows& rows,
                        Workspace& ws) const;
  // clamp(Forward, 0, 4), the view used for verdicts and metrics.
  double Predict(const Item& item, const PredictionRequest& request) const;

  // Accumulates d(output)/d(params) * dout into `grads`; returns d/d(content)
  // in `content_grad` when non-null.
  void Backward(const Workspace& ws, const FeatureRows& rows, double dout,
                ModelGradients& grads, std::span<double> content_grad) const;

  // Parameter blocks in a fixed order: encoder table (hashed_bow only),
  // annotator table, group tables, cross W/b, deep W/b, output w/b.
  std::vector<Tensor*> Blocks();
  std::vector<const Tensor*> Blocks() const;
  std::vector<ParamGroup> BlockGroups() const;

  bool SameParameters(const JuryModel& other) const;

 private:
  friend void SaveCheckpoint(const JuryModel& model, const std::filesystem::path& path);
  friend JuryModel LoadCheckpoint(const std::filesystem::path& path);

  void BuildLayout();
  void BuildIndex();

  ModelConfig config_;
  ModelKind kind_ = ModelKind::kFull;
  TrainingMetadata metadata_;
  ContentEncoder encoder_;

  std::vector<std::string> annotator_ids_;
  std::vector<std::vector<std::size_t>> annotator_groups_;  // per annotator, per attribute
  std::vector<std::string> attributes_;
  std::vector<std::vector<std::string>> values_;  // sorted; table row = index, last row = fallback
  std::unordered_map<std::string, std::size_t> annotator_index_;

  std::vector<Tensor> params_;
  std::optional<std::size_t> annotator_table_;
  std::vector<std::size_t> group_tables_;
  std::vector<std::size_t> cross_w_, cross_b_, deep_w_, deep_b_;
  std::size_t out_w_ = 0, out_b_ = 0;
  std::size_t width_ = 0;
};

// Gradient buffers aligned with JuryModel::Blocks().
class ModelGradients {
 public:
  explicit ModelGradients(const JuryModel& model);

  std::vector<GradBlock>& blocks() { return blocks_; }
  const std::vector<GradBlock>& blocks() const { return blocks_; }
  GradBlock& block(std::size_t i) { return blocks_[i]; }
  void Zero();

 private:
  std::vector<GradBlock> blocks_;
};

// Binary checkpoint (little-endian, versioned header, schema tables, float64
// parameter blocks, checksum) plus a "<path>.json" sidecar.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void SaveCheckpoint(const JuryModel& model, const std::filesystem::path& path);
JuryModel LoadCheckpoint(const std::filesystem::path& path);

}  // namespace jury

#endif  // JURY_MODEL_HPP_
