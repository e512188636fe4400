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

#ifndef JURY_TESTS_TEST_SUPPORT_HPP_
#define JURY_TESTS_TEST_SUPPORT_HPP_

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/error.hpp"
#include "jury/model.hpp"

namespace jury::testing {

#define EXPECT_JURY_ERROR(stmt, expected_code)                                      \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "expected " << ::jury::ErrorCodeName(expected_code);        \
    } catch (const ::jury::Error& e_) {                                             \
      EXPECT_EQ(::jury::ErrorCodeName(e_.code()), ::jury::ErrorCodeName(expected_code)) \
          << e_.what() << " (" << e_.detail() << ")";                              \
    }                                                                               \
  } while (0)

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("jurytest_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Ten annotators over gender x race. Exactly a01 and a02 are female and Black.
inline std::vector<AnnotatorProfile> TenAnnotators() {
  return {
      {"a01", {{"gender", "female"}, {"race", "Black"}}},
      {"a02", {{"gender", "female"}, {"race", "Black"}}},
      {"a03", {{"gender", "female"}, {"race", "White"}}},
      {"a04", {{"gender", "female"}, {"race", "Asian"}}},
      {"a05", {{"gender", "male"}, {"race", "Black"}}},
      {"a06", {{"gender", "male"}, {"race", "White"}}},
      {"a07", {{"gender", "male"}, {"race", "White"}}},
      {"a08", {{"gender", "nonbinary"}, {"race", "Asian"}}},
      {"a09", {{"gender", "nonbinary"}, {"race", "White"}}},
      {"a10", {{"gender", "nonbinary"}, {"race", "Black"}}},
  };
}

// `n` items "i00".."i{n-1}", text "w<k> common", embedding [k * 0.25].
inline std::vector<Item> NumberedItems(int n, bool with_embedding) {
  std::vector<Item> items;
  for (int k = 0; k < n; ++k) {
    std::string id = (k < 10 ? "i0" : "i") + std::to_string(k);
    Item item{id, "w" + std::to_string(k) + " common", std::nullopt};
    if (with_embedding) item.embedding = std::vector<double>{0.25 * k};
    items.push_back(std::move(item));
  }
  return items;
}

// Ten annotators, four items, everyone labels every item with a score that
// depends on gender.
inline Dataset TenAnnotatorDataset(bool with_embedding = false) {
  auto annotators = TenAnnotators();
  auto items = NumberedItems(4, with_embedding);
  std::vector<Annotation> annotations;
  for (const auto& a : annotators) {
    for (std::size_t k = 0; k < items.size(); ++k) {
      const double base = a.attributes.at("gender") == "female" ? 3.0 : 1.0;
      annotations.push_back({a.annotator_id, items[k].item_id, k % 2 == 0 ? base : base - 1.0});
    }
  }
  return Dataset(std::move(items), std::move(annotators), std::move(annotations));
}

inline ModelConfig TinyConfig() {
  ModelConfig c;
  c.embedding_dim = 3;
  c.cross_layers = 2;
  c.deep_layers = {6, 4};
  c.encoder.dim = 5;
  c.encoder.buckets = 64;
  return c;
}

inline Tensor* FindBlock(JuryModel& model, const std::string& name) {
  for (Tensor* t : model.Blocks()) {
    if (t->name == name) return t;
  }
  return nullptr;
}

inline void ZeroParameters(JuryModel& model) {
  for (Tensor* t : model.Blocks()) std::fill(t->data.begin(), t->data.end(), 0.0);
}

// Model whose raw output is exactly item.embedding[0] + offset(annotator):
// one identity cross layer, one ReLU unit shifted by +100 so it stays active,
// and an output bias of -100. Items must carry one-dimensional embeddings.
inline JuryModel ScriptedModel(const Dataset& dataset,
                               const std::map<std::string, double>& offsets,
                               double unknown_offset = 0.0) {
  ModelConfig c;
  c.embedding_dim = 1;
  c.cross_layers = 1;
  c.deep_layers = {1};
  c.include_groups = false;
  c.encoder.kind = EncoderKind::kPrecomputed;
  c.encoder.dim = 1;
  c.encoder.trainable = false;
  JuryModel model = JuryModel::Initialize(c, dataset, 7);
  ZeroParameters(model);
  Tensor* table = FindBlock(model, "annotators");
  for (std::size_t r = 0; r < model.annotator_ids().size(); ++r) {
    auto it = offsets.find(model.annotator_ids()[r]);
    table->at(r, 0) = it == offsets.end() ? 0.0 : it->second;
  }
  table->at(model.unknown_annotator_row(), 0) = unknown_offset;
  Tensor* w = FindBlock(model, "deep.0.w");
  w->at(0, 0) = 1.0;
  w->at(0, 1) = 1.0;
  FindBlock(model, "deep.0.b")->at(0, 0) = 100.0;
  FindBlock(model, "output.w")->at(0, 0) = 1.0;
  FindBlock(model, "output.b")->at(0, 0) = -100.0;
  return model;
}

// Item with a one-dimensional embedding, for ScriptedModel.
inline Item ScalarItem(double value, std::string text = "probe") {
  return Item{"", std::move(text), std::vector<double>{value}};
}

}  // namespace jury::testing

#endif  // JURY_TESTS_TEST_SUPPORT_HPP_
