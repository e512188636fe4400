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

#ifndef JURY_CONDITIONAL_HPP_
#define JURY_CONDITIONAL_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jury/encoder.hpp"
#include "jury/jury.hpp"

namespace jury {

enum class PredicateKind { kKeywordContains, kEmbeddingWithin };

struct Predicate {
  PredicateKind kind = PredicateKind::kKeywordContains;
  std::string term;           // keyword, or probe text for embedding rules
  double max_distance = 0.0;  // cosine distance bound, embedding rules only

  bool operator==(const Predicate&) const = default;
};

struct ConditionRule {
  std::string name;
  Predicate predicate;
  std::vector<JurorSheet> patch;
  int priority = 0;  // higher is evaluated first

  bool operator==(const ConditionRule&) const = default;
};

struct ConditionalJuryPolicy {
  std::vector<JurorSheet> default_sheets;
  std::vector<ConditionRule> rules;
  int n_jurors = kDefaultJurySize;
  // Label of the unconstrained sheet that fills unused seats.
  std::string remainder_sheet_id = "remainder";

  void Validate() const;
};

// 1 - cos(a, b); 0 for identical vectors, 1 when either is all zeros.
double CosineDistance(std::span<const double> a, std::span<const double> b);

struct RuleTrace {
  std::size_t rule_index = 0;  // position in policy.rules
  std::string name;
  bool matched = false;
  std::optional<double> distance;  // embedding rules with an encoder
  std::optional<std::string> error;
};

struct ResolutionTrace {
  std::vector<RuleTrace> evaluated;  // evaluation (priority) order
  std::optional<std::size_t> fired;  // rule_index of the winner
};

// Rule evaluation order: priority descending, then list order.
std::vector<std::size_t> RuleOrder(const ConditionalJuryPolicy& policy);

// Default sheets plus the first matching rule's patch; unused seats go to an
// unconstrained sheet. Throws EncoderRequired for an embedding rule reached
// without an encoder.
JuryComposition ResolveComposition(const ConditionalJuryPolicy& policy, const Item& item,
                                   const ContentEncoder* encoder);

// Evaluates every rule and records each outcome; never throws for a missing
// encoder (the rule is recorded as unmatched with an error note).
ResolutionTrace ExplainResolution(const ConditionalJuryPolicy& policy, const Item& item,
                                  const ContentEncoder* encoder);

}  // namespace jury

#endif  // JURY_CONDITIONAL_HPP_
