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

#ifndef JURY_DATASET_HPP_
#define JURY_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace jury {

inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 4.0;
inline constexpr const char* kUndisclosed = "undisclosed";

struct Item {
  std::string item_id;
  std::string text;
  std::optional<std::vector<double>> embedding;
};

struct AnnotatorProfile {
  std::string annotator_id;
  std::map<std::string, std::string> attributes;
};

struct Annotation {
  std::string annotator_id;
  std::string item_id;
  double score = 0.0;
};

// Ordered attribute names, each with its sorted legal values.
struct AttributeSchema {
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> values;

  bool HasAttribute(const std::string& name) const;
  bool HasValue(const std::string& name, const std::string& value) const;
  // Index of `value` within values.at(name), or nullopt.
  std::optional<std::size_t> ValueIndex(const std::string& name,
                                        const std::string& value) const;

  bool operator==(const AttributeSchema&) const = default;
};

// Conjunction of attribute == value constraints.
using Constraints = std::map<std::string, std::string>;

// Immutable, validated annotator-level dataset. Construction checks id
// uniqueness, referential integrity, score range and embedding shape, and
// fills missing attribute values with "undisclosed".
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Item> items, std::vector<AnnotatorProfile> annotators,
          std::vector<Annotation> annotations,
          const AttributeSchema* declared_schema = nullptr);

  const std::vector<Item>& items() const { return items_; }
  const std::vector<AnnotatorProfile>& annotators() const { return annotators_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }
  const AttributeSchema& schema() const { return schema_; }

  std::optional<std::size_t> FindItem(const std::string& item_id) const;
  std::optional<std::size_t> FindAnnotator(const std::string& annotator_id) const;
  const Item& item(std::size_t index) const { return items_[index]; }
  const AnnotatorProfile& annotator(std::size_t index) const { return annotators_[index]; }

  // Indices into annotations(), in load order.
  const std::vector<std::size_t>& AnnotationsOfItem(std::size_t item_index) const {
    return by_item_[item_index];
  }
  const std::vector<std::size_t>& AnnotationsOfAnnotator(std::size_t annotator_index) const {
    return by_annotator_[annotator_index];
  }
  std::size_t ItemIndexOf(const Annotation& a) const { return *FindItem(a.item_id); }
  std::size_t AnnotatorIndexOf(const Annotation& a) const { return *FindAnnotator(a.annotator_id); }

  // Length of item embeddings, 0 when items carry none.
  std::size_t embedding_dim() const { return embedding_dim_; }
  bool empty() const { return annotations_.empty(); }

 private:
  std::vector<Item> items_;
  std::vector<AnnotatorProfile> annotators_;
  std::vector<Annotation> annotations_;
  AttributeSchema schema_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::unordered_map<std::string, std::size_t> annotator_index_;
  std::vector<std::vector<std::size_t>> by_item_;
  std::vector<std::vector<std::size_t>> by_annotator_;
  std::size_t embedding_dim_ = 0;
};

struct DatasetPaths {
  std::filesystem::path items;
  std::filesystem::path annotators;
  std::filesystem::path annotations;

  // items.jsonl / annotators.jsonl / annotations.jsonl inside `dir`.
  static DatasetPaths InDirectory(const std::filesystem::path& dir);
};

// Line-delimited JSON loader. The annotators file may start with a
// {"schema": {attr: [values...]}} header line declaring legal values.
// A path ending in ".csv" for annotations uses the CSV adapter.
Dataset LoadDataset(const DatasetPaths& paths);
void SaveDataset(const Dataset& dataset, const DatasetPaths& paths);

// CSV adapter for the annotations table: header annotator_id,item_id,score.
std::vector<Annotation> LoadAnnotationsCsv(const std::filesystem::path& path);

// Checks `constraints` against the schema; throws UnknownAttribute/UnknownValue.
void ValidateConstraints(const AttributeSchema& schema, const Constraints& constraints);

// Indices (ascending) of annotators matching every constraint.
std::vector<std::size_t> EligibleAnnotators(const Dataset& dataset,
                                            const Constraints& constraints);

// Partition by item: a `test_fraction` share of items (seeded shuffle) and all
// their annotations go to the second dataset. Both keep every annotator
// profile and the full schema.
std::pair<Dataset, Dataset> SplitByItem(const Dataset& dataset, double test_fraction,
                                        std::uint64_t seed);

}  // namespace jury

#endif  // JURY_DATASET_HPP_
