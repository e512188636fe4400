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

#include "jury/conditional.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "jury/error.hpp"

namespace jury {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int Seats(const std::vector<JurorSheet>& sheets) {
  int n = 0;
  for (const auto& s : sheets) n += s.seats;
  return n;
}

struct Evaluation {
  bool matched = false;
  std::optional<double> distance;
};

Evaluation Evaluate(const Predicate& p, const Item& item, const ContentEncoder* encoder) {
  if (p.kind == PredicateKind::kKeywordContains) {
    return {Lower(item.text).find(Lower(p.term)) != std::string::npos, std::nullopt};
  }
  if (encoder == nullptr || !encoder->has_parameters()) {
    throw Error(ErrorCode::kEncoderRequired, "embedding rule needs a text encoder", p.term);
  }
  const auto probe = encoder->Encode(Item{"", p.term, std::nullopt});
  const auto content = encoder->Encode(Item{item.item_id, item.text, std::nullopt});
  const double d = CosineDistance(probe, content);
  return {d < p.max_distance, d};
}

}  // namespace

void ConditionalJuryPolicy::Validate() const {
  if (n_jurors < 1) throw Error(ErrorCode::kInvalidComposition, "n_jurors must be at least 1");
  auto check_sheets = [](const std::vector<JurorSheet>& sheets) {
    for (const auto& s : sheets) {
      if (s.seats < 1) {
        throw Error(ErrorCode::kInvalidComposition, "sheet seats must be at least 1", s.sheet_id);
      }
    }
  };
  check_sheets(default_sheets);
  const int base = Seats(default_sheets);
  if (base > n_jurors) {
    throw Error(ErrorCode::kInvalidComposition, "default sheets exceed n_jurors");
  }
  for (const auto& rule : rules) {
    check_sheets(rule.patch);
    if (base + Seats(rule.patch) > n_jurors) {
      throw Error(ErrorCode::kInvalidComposition, "default plus patch seats exceed n_jurors",
                  rule.name);
    }
    const auto& p = rule.predicate;
    if (p.kind == PredicateKind::kKeywordContains && p.term.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "keyword rule has an empty term", rule.name);
    }
    if (p.kind == PredicateKind::kEmbeddingWithin &&
        !(p.max_distance >= 0.0 && p.max_distance <= 2.0)) {
      throw Error(ErrorCode::kInvalidArgument, "max_distance must lie in [0, 2]", rule.name);
    }
  }
}

double CosineDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "vector lengths differ");
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
    const bool zero = std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
    return zero ? 1.0 : 0.0;
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double cos = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return 1.0 - cos;
}

std::vector<std::size_t> RuleOrder(const ConditionalJuryPolicy& policy) {
  std::vector<std::size_t> order(policy.rules.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return policy.rules[a].priority > policy.rules[b].priority;
  });
  return order;
}

JuryComposition ResolveComposition(const ConditionalJuryPolicy& policy, const Item& item,
                                   const ContentEncoder* encoder) {
  policy.Validate();
  std::vector<JurorSheet> sheets = policy.default_sheets;
  for (std::size_t r : RuleOrder(policy)) {
    const auto& rule = policy.rules[r];
    if (Evaluate(rule.predicate, item, encoder).matched) {
      sheets.insert(sheets.end(), rule.patch.begin(), rule.patch.end());
      break;
    }
  }
  const int remainder = policy.n_jurors - Seats(sheets);
  if (remainder > 0) sheets.push_back({policy.remainder_sheet_id, {}, remainder});
  return JuryComposition::FromSheets(std::move(sheets));
}

ResolutionTrace ExplainResolution(const ConditionalJuryPolicy& policy, const Item& item,
                                  const ContentEncoder* encoder) {
  ResolutionTrace trace;
  for (std::size_t r : RuleOrder(policy)) {
    const auto& rule = policy.rules[r];
    RuleTrace t;
    t.rule_index = r;
    t.name = rule.name;
    try {
      const Evaluation e = Evaluate(rule.predicate, item, encoder);
      t.matched = e.matched;
      t.distance = e.distance;
    } catch (const Error& e) {
      t.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    }
    if (t.matched && !trace.fired) trace.fired = r;
    trace.evaluated.push_back(std::move(t));
  }
  return trace;
}

}  // namespace jury
