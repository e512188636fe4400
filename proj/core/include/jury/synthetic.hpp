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

#ifndef JURY_SYNTHETIC_HPP_
#define JURY_SYNTHETIC_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "jury/dataset.hpp"

namespace jury {

// Additive score offset for annotators holding attribute == value. When
// `topic_only` is set the offset applies only to topic items.
struct GroupEffect {
  std::string attribute;
  std::string value;
  double offset = 0.0;
  bool topic_only = false;
};

// Synthetic annotator-level dataset. Item text is a bag of vocabulary tokens
// ("w0".."w{V-1}") each carrying a latent weight; the item base score is
// clamp(item_base_mean + item_base_scale * mean token weight, 0, 4). A
// `topic_fraction` share of items additionally contains `topic_token`.
struct SyntheticSpec {
  std::map<std::string, std::vector<std::string>> attribute_values;
  // Optional per-attribute sampling weights aligned with attribute_values.
  std::map<std::string, std::vector<double>> value_weights;
  std::vector<GroupEffect> group_effects;
  double annotator_sigma = 0.3;
  double item_base_mean = 1.0;
  double item_base_scale = 1.5;
  double observation_sigma = 0.5;
  std::size_t n_items = 100;
  std::size_t n_annotators = 50;
  std::size_t labels_per_item = 5;
  std::size_t vocab_size = 200;
  std::size_t tokens_per_item = 8;
  double topic_fraction = 0.0;
  std::string topic_token = "topicx";
  // >0: items also carry a precomputed embedding (mean of per-token vectors).
  std::size_t embedding_dim = 0;
  std::uint64_t seed = 1;

  void Validate() const;
};

// The generating process, queryable per (annotator, item).
class GroundTruthOracle {
 public:
  // clamp(item_base + applicable group offsets + annotator offset, 0, 4)
  double TrueScore(const std::string& annotator_id, const std::string& item_id) const;
  // E[observed label]: expectation of round(clamp(true + N(0, s^2), 0, 4)).
  double ExpectedObserved(const std::string& annotator_id, const std::string& item_id) const;

  double item_base(const std::string& item_id) const { return items_.at(item_id).base; }
  bool is_topic(const std::string& item_id) const { return items_.at(item_id).topic; }
  double annotator_offset(const std::string& annotator_id) const {
    return annotators_.at(annotator_id).offset;
  }
  double observation_sigma() const { return observation_sigma_; }

 private:
  friend std::pair<Dataset, GroundTruthOracle> GenerateSynthetic(const SyntheticSpec& spec);

  struct ItemTruth {
    double base = 0.0;
    bool topic = false;
  };
  struct AnnotatorTruth {
    double offset = 0.0;
    double group_offset = 0.0;        // applies to every item
    double topic_group_offset = 0.0;  // applies to topic items only
  };
  std::unordered_map<std::string, ItemTruth> items_;
  std::unordered_map<std::string, AnnotatorTruth> annotators_;
  double observation_sigma_ = 0.0;
};

// Deterministic for a fixed spec (including seed).
std::pair<Dataset, GroundTruthOracle> GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace jury

#endif  // JURY_SYNTHETIC_HPP_
