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

#include "jury/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "jury/error.hpp"
#include "jury/rng.hpp"

namespace jury {

using nlohmann::json;

bool AttributeSchema::HasAttribute(const std::string& name) const {
  return values.count(name) > 0;
}

bool AttributeSchema::HasValue(const std::string& name, const std::string& value) const {
  return ValueIndex(name, value).has_value();
}

std::optional<std::size_t> AttributeSchema::ValueIndex(const std::string& name,
                                                       const std::string& value) const {
  auto it = values.find(name);
  if (it == values.end()) return std::nullopt;
  auto pos = std::lower_bound(it->second.begin(), it->second.end(), value);
  if (pos == it->second.end() || *pos != value) return std::nullopt;
  return static_cast<std::size_t>(pos - it->second.begin());
}

Dataset::Dataset(std::vector<Item> items, std::vector<AnnotatorProfile> annotators,
                 std::vector<Annotation> annotations, const AttributeSchema* declared_schema)
    : items_(std::move(items)),
      annotators_(std::move(annotators)),
      annotations_(std::move(annotations)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!item_index_.emplace(items_[i].item_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate item_id", items_[i].item_id);
    }
  }
  bool any_embedding = false;
  bool all_embedding = true;
  for (const auto& item : items_) {
    if (item.embedding) {
      if (any_embedding && item.embedding->size() != embedding_dim_) {
        throw Error(ErrorCode::kMalformedRecord, "inconsistent embedding length",
                    "item_id=" + item.item_id);
      }
      any_embedding = true;
      embedding_dim_ = item.embedding->size();
    } else {
      all_embedding = false;
    }
  }
  if (any_embedding && !all_embedding) {
    throw Error(ErrorCode::kMalformedRecord,
                "either all items carry an embedding or none do");
  }

  std::set<std::string> names;
  if (declared_schema) names.insert(declared_schema->names.begin(), declared_schema->names.end());
  for (const auto& a : annotators_) {
    for (const auto& [k, v] : a.attributes) names.insert(k);
  }
  std::map<std::string, std::set<std::string>> values;
  if (declared_schema) {
    for (const auto& [k, vs] : declared_schema->values) values[k].insert(vs.begin(), vs.end());
  }
  for (std::size_t i = 0; i < annotators_.size(); ++i) {
    auto& a = annotators_[i];
    if (!annotator_index_.emplace(a.annotator_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate annotator_id", a.annotator_id);
    }
    for (const auto& name : names) {
      auto [it, inserted] = a.attributes.emplace(name, kUndisclosed);
      values[name].insert(it->second);
    }
  }
  schema_.names.assign(names.begin(), names.end());
  for (const auto& name : schema_.names) {
    schema_.values[name].assign(values[name].begin(), values[name].end());
  }

  by_item_.assign(items_.size(), {});
  by_annotator_.assign(annotators_.size(), {});
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t n = 0; n < annotations_.size(); ++n) {
    const auto& a = annotations_[n];
    auto ai = annotator_index_.find(a.annotator_id);
    if (ai == annotator_index_.end()) {
      throw Error(ErrorCode::kReferentialIntegrity, "annotation references unknown annotator",
                  "annotator_id=" + a.annotator_id);
    }
    auto ii = item_index_.find(a.item_id);
    if (ii == item_index_.end()) {
      throw Error(ErrorCode::kReferentialIntegrity, "annotation references unknown item",
                  "item_id=" + a.item_id);
    }
    if (!(a.score >= kMinScore && a.score <= kMaxScore)) {
      std::ostringstream os;
      os << "score=" << a.score << " annotator_id=" << a.annotator_id
         << " item_id=" << a.item_id;
      throw Error(ErrorCode::kScoreOutOfRange, "score outside [0, 4]", os.str());
    }
    if (!seen.emplace(ai->second, ii->second).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate (annotator_id, item_id) annotation",
                  a.annotator_id + "/" + a.item_id);
    }
    by_item_[ii->second].push_back(n);
    by_annotator_[ai->second].push_back(n);
  }
}

std::optional<std::size_t> Dataset::FindItem(const std::string& item_id) const {
  auto it = item_index_.find(item_id);
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Dataset::FindAnnotator(const std::string& annotator_id) const {
  auto it = annotator_index_.find(annotator_id);
  if (it == annotator_index_.end()) return std::nullopt;
  return it->second;
}

DatasetPaths DatasetPaths::InDirectory(const std::filesystem::path& dir) {
  return {dir / "items.jsonl", dir / "annotators.jsonl", dir / "annotations.jsonl"};
}

namespace {

[[noreturn]] void Malformed(const std::filesystem::path& path, std::size_t line,
                            const std::string& field, const std::string& why) {
  std::ostringstream os;
  os << path.string() << ":" << line << " field '" << field << "'";
  throw Error(ErrorCode::kMalformedRecord, "malformed record: " + why, os.str());
}

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      Malformed(path, lineno, "<line>", e.what());
    }
    if (!record.is_object()) Malformed(path, lineno, "<line>", "expected a JSON object");
    fn(record, lineno);
  }
}

std::string RequireString(const json& r, const char* field, const std::filesystem::path& path,
                          std::size_t line) {
  auto it = r.find(field);
  if (it == r.end() || !it->is_string()) Malformed(path, line, field, "missing or not a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<Annotation> LoadAnnotationsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open file", path.string());
  std::vector<Annotation> out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  int c_annotator = -1, c_item = -1, c_score = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (header.empty()) {
      header = cells;
      for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == "annotator_id") c_annotator = i;
        if (header[i] == "item_id") c_item = i;
        if (header[i] == "score") c_score = i;
      }
      if (c_annotator < 0) Malformed(path, lineno, "annotator_id", "missing CSV column");
      if (c_item < 0) Malformed(path, lineno, "item_id", "missing CSV column");
      if (c_score < 0) Malformed(path, lineno, "score", "missing CSV column");
      continue;
    }
    if (cells.size() != header.size()) Malformed(path, lineno, "<row>", "wrong column count");
    Annotation a;
    a.annotator_id = cells[c_annotator];
    a.item_id = cells[c_item];
    try {
      std::size_t used = 0;
      a.score = std::stod(cells[c_score], &used);
      if (used != cells[c_score].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      Malformed(path, lineno, "score", "not a number");
    }
    out.push_back(std::move(a));
  }
  return out;
}

Dataset LoadDataset(const DatasetPaths& paths) {
  std::vector<Item> items;
  ForEachJsonLine(paths.items, [&](const json& r, std::size_t line) {
    Item item;
    item.item_id = RequireString(r, "item_id", paths.items, line);
    item.text = r.contains("text") ? RequireString(r, "text", paths.items, line) : "";
    if (auto it = r.find("embedding"); it != r.end() && !it->is_null()) {
      if (!it->is_array()) Malformed(paths.items, line, "embedding", "expected an array");
      std::vector<double> v;
      for (const auto& x : *it) {
        if (!x.is_number()) Malformed(paths.items, line, "embedding", "non-numeric entry");
        v.push_back(x.get<double>());
      }
      item.embedding = std::move(v);
    }
    items.push_back(std::move(item));
  });

  std::vector<AnnotatorProfile> annotators;
  std::optional<AttributeSchema> declared;
  ForEachJsonLine(paths.annotators, [&](const json& r, std::size_t line) {
    if (r.contains("schema") && !r.contains("annotator_id")) {
      if (declared || !annotators.empty()) {
        Malformed(paths.annotators, line, "schema", "schema header must be the first record");
      }
      const auto& s = r["schema"];
      if (!s.is_object()) Malformed(paths.annotators, line, "schema", "expected an object");
      AttributeSchema schema;
      for (const auto& [name, vals] : s.items()) {
        if (!vals.is_array()) Malformed(paths.annotators, line, "schema." + name, "expected array");
        schema.names.push_back(name);
        auto& dst = schema.values[name];
        for (const auto& v : vals) {
          if (!v.is_string()) Malformed(paths.annotators, line, "schema." + name, "non-string value");
          dst.push_back(v.get<std::string>());
        }
      }
      declared = std::move(schema);
      return;
    }
    AnnotatorProfile p;
    p.annotator_id = RequireString(r, "annotator_id", paths.annotators, line);
    if (auto it = r.find("attributes"); it != r.end()) {
      if (!it->is_object()) Malformed(paths.annotators, line, "attributes", "expected an object");
      for (const auto& [k, v] : it->items()) {
        if (v.is_null()) continue;
        if (!v.is_string()) Malformed(paths.annotators, line, "attributes." + k, "expected string");
        p.attributes[k] = v.get<std::string>();
      }
    }
    annotators.push_back(std::move(p));
  });

  std::vector<Annotation> annotations;
  if (paths.annotations.extension() == ".csv") {
    annotations = LoadAnnotationsCsv(paths.annotations);
  } else {
    ForEachJsonLine(paths.annotations, [&](const json& r, std::size_t line) {
      Annotation a;
      a.annotator_id = RequireString(r, "annotator_id", paths.annotations, line);
      a.item_id = RequireString(r, "item_id", paths.annotations, line);
      auto it = r.find("score");
      if (it == r.end() || !it->is_number()) {
        Malformed(paths.annotations, line, "score", "missing or not a number");
      }
      a.score = it->get<double>();
      annotations.push_back(std::move(a));
    });
  }
  return Dataset(std::move(items), std::move(annotators), std::move(annotations),
                 declared ? &*declared : nullptr);
}

void SaveDataset(const Dataset& dataset, const DatasetPaths& paths) {
  auto open = [](const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write file", p.string());
    return out;
  };
  {
    auto out = open(paths.items);
    for (const auto& item : dataset.items()) {
      json r = {{"item_id", item.item_id}, {"text", item.text}};
      if (item.embedding) r["embedding"] = *item.embedding;
      out << r.dump() << '\n';
    }
  }
  {
    auto out = open(paths.annotators);
    json schema = json::object();
    for (const auto& name : dataset.schema().names) schema[name] = dataset.schema().values.at(name);
    out << json{{"schema", schema}}.dump() << '\n';
    for (const auto& a : dataset.annotators()) {
      out << json{{"annotator_id", a.annotator_id}, {"attributes", a.attributes}}.dump() << '\n';
    }
  }
  {
    auto out = open(paths.annotations);
    for (const auto& a : dataset.annotations()) {
      out << json{{"annotator_id", a.annotator_id}, {"item_id", a.item_id}, {"score", a.score}}.dump()
          << '\n';
    }
  }
}

void ValidateConstraints(const AttributeSchema& schema, const Constraints& constraints) {
  for (const auto& [name, value] : constraints) {
    if (!schema.HasAttribute(name)) {
      throw Error(ErrorCode::kUnknownAttribute, "unknown attribute", name);
    }
    if (!schema.HasValue(name, value)) {
      throw Error(ErrorCode::kUnknownValue, "unknown attribute value", name + "=" + value);
    }
  }
}

std::vector<std::size_t> EligibleAnnotators(const Dataset& dataset,
                                            const Constraints& constraints) {
  ValidateConstraints(dataset.schema(), constraints);
  std::vector<std::size_t> out;
  const auto& annotators = dataset.annotators();
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    bool ok = true;
    for (const auto& [name, value] : constraints) {
      if (annotators[i].attributes.at(name) != value) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(i);
  }
  return out;
}

std::pair<Dataset, Dataset> SplitByItem(const Dataset& dataset, double test_fraction,
                                        std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in [0, 1]");
  }
  const std::size_t n = dataset.items().size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<char> is_test(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

  std::vector<Item> train_items, test_items;
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? test_items : train_items).push_back(dataset.item(i));
  }
  std::vector<Annotation> train_ann, test_ann;
  for (const auto& a : dataset.annotations()) {
    (is_test[dataset.ItemIndexOf(a)] ? test_ann : train_ann).push_back(a);
  }
  const AttributeSchema& schema = dataset.schema();
  return {Dataset(std::move(train_items), dataset.annotators(), std::move(train_ann), &schema),
          Dataset(std::move(test_items), dataset.annotators(), std::move(test_ann), &schema)};
}

}  // namespace jury
