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

#include "jury/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "jury/error.hpp"
#include "jury/rng.hpp"

namespace jury {

namespace {

double Clamp(double x) { return std::clamp(x, kMinScore, kMaxScore); }

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string PaddedId(char prefix, std::size_t i, std::size_t n) {
  int width = 1;
  for (std::size_t m = n > 0 ? n - 1 : 0; m >= 10; m /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

void SyntheticSpec::Validate() const {
  auto bad = [](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic spec: " + why);
  };
  if (n_items == 0 || n_annotators == 0 || labels_per_item == 0) bad("counts must be positive");
  if (labels_per_item > n_annotators) bad("labels_per_item exceeds n_annotators");
  if (vocab_size == 0 || tokens_per_item == 0) bad("vocabulary and token counts must be positive");
  if (!(annotator_sigma >= 0.0)) bad("annotator_sigma must be >= 0");
  if (!(observation_sigma >= 0.0)) bad("observation_sigma must be >= 0");
  if (!(topic_fraction >= 0.0 && topic_fraction <= 1.0)) bad("topic_fraction must lie in [0, 1]");
  for (const auto& [name, values] : attribute_values) {
    if (values.empty()) bad("attribute '" + name + "' has no values");
    if (auto w = value_weights.find(name); w != value_weights.end()) {
      if (w->second.size() != values.size()) bad("value_weights size mismatch for '" + name + "'");
      double total = 0.0;
      for (double x : w->second) {
        if (!(x >= 0.0)) bad("negative value weight for '" + name + "'");
        total += x;
      }
      if (!(total > 0.0)) bad("value weights for '" + name + "' sum to zero");
    }
  }
  for (const auto& e : group_effects) {
    auto it = attribute_values.find(e.attribute);
    if (it == attribute_values.end() ||
        std::find(it->second.begin(), it->second.end(), e.value) == it->second.end()) {
      bad("group effect references unknown " + e.attribute + "=" + e.value);
    }
  }
}

double GroundTruthOracle::TrueScore(const std::string& annotator_id,
                                    const std::string& item_id) const {
  const auto& item = items_.at(item_id);
  const auto& a = annotators_.at(annotator_id);
  double s = item.base + a.group_offset + a.offset;
  if (item.topic) s += a.topic_group_offset;
  return Clamp(s);
}

double GroundTruthOracle::ExpectedObserved(const std::string& annotator_id,
                                           const std::string& item_id) const {
  const double t = TrueScore(annotator_id, item_id);
  if (observation_sigma_ == 0.0) return std::round(t);
  // P(round(clamp(t + e)) = k): interior k covers [k - 0.5, k + 0.5), the end
  // labels absorb the clamped tails.
  double expected = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const double upper = k == 4 ? 1.0 : NormalCdf((k + 0.5 - t) / observation_sigma_);
    const double lower = NormalCdf((k - 0.5 - t) / observation_sigma_);
    expected += k * (upper - lower);
  }
  return expected;
}

std::pair<Dataset, GroundTruthOracle> GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  GroundTruthOracle oracle;
  oracle.observation_sigma_ = spec.observation_sigma;

  std::vector<double> token_weight(spec.vocab_size);
  for (auto& w : token_weight) w = std_normal(rng);
  const std::size_t dim = spec.embedding_dim;
  // Row vocab_size holds the topic token's vector.
  std::vector<double> token_vec((spec.vocab_size + 1) * dim);
  for (auto& x : token_vec) x = std_normal(rng);

  std::vector<Item> items;
  items.reserve(spec.n_items);
  std::uniform_int_distribution<std::size_t> pick_token(0, spec.vocab_size - 1);
  std::bernoulli_distribution pick_topic(spec.topic_fraction);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    Item item;
    item.item_id = PaddedId('i', i, spec.n_items);
    std::vector<std::size_t> tokens(spec.tokens_per_item);
    double weight_sum = 0.0;
    for (auto& t : tokens) {
      t = pick_token(rng);
      weight_sum += token_weight[t];
    }
    const bool topic = pick_topic(rng);
    std::string text;
    for (std::size_t t : tokens) {
      if (!text.empty()) text += ' ';
      text += "w" + std::to_string(t);
    }
    if (topic) text += " " + spec.topic_token;
    item.text = std::move(text);
    if (dim > 0) {
      std::vector<double> e(dim, 0.0);
      if (topic) tokens.push_back(spec.vocab_size);
      for (std::size_t t : tokens) {
        for (std::size_t d = 0; d < dim; ++d) e[d] += token_vec[t * dim + d];
      }
      for (auto& x : e) x /= static_cast<double>(tokens.size());
      item.embedding = std::move(e);
    }
    const double mean_weight = weight_sum / static_cast<double>(spec.tokens_per_item);
    oracle.items_[item.item_id] = {Clamp(spec.item_base_mean + spec.item_base_scale * mean_weight),
                                   topic};
    items.push_back(std::move(item));
  }

  std::vector<AnnotatorProfile> annotators;
  annotators.reserve(spec.n_annotators);
  for (std::size_t a = 0; a < spec.n_annotators; ++a) {
    AnnotatorProfile p;
    p.annotator_id = PaddedId('a', a, spec.n_annotators);
    for (const auto& [name, values] : spec.attribute_values) {
      std::size_t idx;
      if (auto w = spec.value_weights.find(name); w != spec.value_weights.end()) {
        std::discrete_distribution<std::size_t> pick(w->second.begin(), w->second.end());
        idx = pick(rng);
      } else {
        idx = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng);
      }
      p.attributes[name] = values[idx];
    }
    GroundTruthOracle::AnnotatorTruth truth;
    truth.offset = spec.annotator_sigma * std_normal(rng);
    for (const auto& e : spec.group_effects) {
      if (p.attributes.at(e.attribute) != e.value) continue;
      (e.topic_only ? truth.topic_group_offset : truth.group_offset) += e.offset;
    }
    oracle.annotators_[p.annotator_id] = truth;
    annotators.push_back(std::move(p));
  }

  std::vector<Annotation> annotations;
  annotations.reserve(spec.n_items * spec.labels_per_item);
  std::vector<std::size_t> pool(spec.n_annotators);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> chosen;
  for (const auto& item : items) {
    chosen.clear();
    std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), spec.labels_per_item, rng);
    for (std::size_t a : chosen) {
      const auto& id = annotators[a].annotator_id;
      const double t = oracle.TrueScore(id, item.item_id);
      const double noisy = t + spec.observation_sigma * std_normal(rng);
      annotations.push_back({id, item.item_id, std::round(Clamp(noisy))});
    }
  }

  AttributeSchema declared;
  for (const auto& [name, values] : spec.attribute_values) {
    declared.names.push_back(name);
    declared.values[name] = values;
  }
  return {Dataset(std::move(items), std::move(annotators), std::move(annotations), &declared),
          std::move(oracle)};
}

}  // namespace jury
