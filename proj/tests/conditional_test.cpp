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

#include <algorithm>
#include <cmath>

#include "jury/conditional.hpp"
#include "test_support.hpp"

namespace jury {
namespace {

Item Text(std::string text) { return Item{"x", std::move(text), std::nullopt}; }

ConditionRule Keyword(std::string name, std::string term, Constraints c, int seats = 6,
                      int priority = 0) {
  return {std::move(name), {PredicateKind::kKeywordContains, std::move(term), 0.0},
          {{"", std::move(c), seats}}, priority};
}

ConditionRule Near(std::string name, std::string probe, double bound, Constraints c, int seats = 6) {
  return {std::move(name), {PredicateKind::kEmbeddingWithin, std::move(probe), bound},
          {{"", std::move(c), seats}}, 0};
}

// Six fixed seats and an elif ladder over hashtags.
ConditionalJuryPolicy Hashtags() {
  ConditionalJuryPolicy p;
  p.default_sheets = {{"base", {}, 6}};
  p.rules = {Keyword("metoo", "#metoo", {{"gender_identity", "female"}}),
             Keyword("blm", "#blm", {{"racial_identity", "Black"}})};
  return p;
}

ContentEncoder RandomEncoder() {
  ContentEncoderConfig c;
  c.dim = 16;
  c.buckets = 256;
  ContentEncoder e(c);
  Rng rng = MakeStream(3, 0);
  e.InitializeNormal(rng, 1.0);
  return e;
}

int Seats(const JuryComposition& c) {
  int n = 0;
  for (const auto& s : c.sheets) n += s.seats;
  return n;
}

TEST(ResolveComposition, KeywordRuleAddsFemaleSeats) {
  const auto c = ResolveComposition(Hashtags(), Text("this #metoo thread"), nullptr);
  ASSERT_EQ(c.sheets.size(), 2u);
  EXPECT_EQ(c.n_jurors, 12);
  EXPECT_EQ(c.sheets[0].seats, 6);
  EXPECT_TRUE(c.sheets[0].constraints.empty());
  EXPECT_EQ(c.sheets[1].seats, 6);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"gender_identity", "female"}}));
}

TEST(ResolveComposition, KeywordIsCaseInsensitiveSubstring) {
  const auto c = ResolveComposition(Hashtags(), Text("Reading #BLMatters today"), nullptr);
  ASSERT_EQ(c.sheets.size(), 2u);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"racial_identity", "Black"}}));
}

TEST(ResolveComposition, NoMatchPadsWithRemainder) {
  const auto c = ResolveComposition(Hashtags(), Text("nothing tagged here"), nullptr);
  ASSERT_EQ(c.sheets.size(), 2u);
  EXPECT_EQ(c.sheets[1].sheet_id, "remainder");
  EXPECT_TRUE(c.sheets[1].constraints.empty());
  EXPECT_EQ(c.sheets[1].seats, 6);
}

TEST(ResolveComposition, FirstMatchOnly) {
  const auto c = ResolveComposition(Hashtags(), Text("#blm and #metoo"), nullptr);
  ASSERT_EQ(c.sheets.size(), 2u);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"gender_identity", "female"}}));
}

TEST(ResolveComposition, SmallPatchLeavesRemainder) {
  ConditionalJuryPolicy p = Hashtags();
  p.rules[0].patch[0].seats = 4;
  const auto c = ResolveComposition(p, Text("#metoo"), nullptr);
  ASSERT_EQ(c.sheets.size(), 3u);
  EXPECT_EQ(c.sheets[1].seats, 4);
  EXPECT_EQ(c.sheets[2].seats, 2);
  EXPECT_EQ(Seats(c), 12);
}

TEST(ResolveComposition, PriorityBeatsListOrder) {
  ConditionalJuryPolicy p = Hashtags();
  p.rules[1].priority = 5;
  const auto c = ResolveComposition(p, Text("#blm and #metoo"), nullptr);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"racial_identity", "Black"}}));
  EXPECT_EQ(RuleOrder(p), (std::vector<std::size_t>{1, 0}));
}

TEST(ResolveComposition, DistinctPrioritiesMakeOrderIrrelevant) {
  ConditionalJuryPolicy p;
  p.default_sheets = {{"base", {}, 4}};
  p.rules = {Keyword("a", "alpha", {{"k", "a"}}, 4, 3), Keyword("b", "beta", {{"k", "b"}}, 4, 7),
             Keyword("c", "gamma", {{"k", "c"}}, 4, 1), Keyword("d", "delta", {{"k", "d"}}, 4, 5)};
  const std::vector<std::string> texts = {"alpha beta", "gamma delta", "alpha gamma", "none", "delta beta"};
  std::vector<JuryComposition> baseline;
  for (const auto& t : texts) baseline.push_back(ResolveComposition(p, Text(t), nullptr));
  std::sort(p.rules.begin(), p.rules.end(),
            [](const ConditionRule& a, const ConditionRule& b) { return a.name < b.name; });
  do {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      EXPECT_EQ(ResolveComposition(p, Text(texts[i]), nullptr).sheets, baseline[i].sheets);
    }
  } while (std::next_permutation(p.rules.begin(), p.rules.end(),
                                 [](const ConditionRule& a, const ConditionRule& b) {
                                   return a.name < b.name;
                                 }));
}

TEST(ResolveComposition, EmbeddingSelfDistanceFires) {
  const ContentEncoder e = RandomEncoder();
  ConditionalJuryPolicy p;
  p.default_sheets = {{"base", {}, 6}};
  p.rules = {Near("topic", "vaccination mandates debate", 0.05, {{"group", "medical"}})};
  const auto c = ResolveComposition(p, Text("vaccination mandates debate"), &e);
  ASSERT_EQ(c.sheets.size(), 2u);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"group", "medical"}}));
}

TEST(ResolveComposition, EmbeddingRuleNeedsEncoder) {
  ConditionalJuryPolicy p;
  p.rules = {Near("topic", "probe", 0.5, {})};
  EXPECT_JURY_ERROR(ResolveComposition(p, Text("probe"), nullptr), ErrorCode::kEncoderRequired);
  ContentEncoderConfig pre;
  pre.kind = EncoderKind::kPrecomputed;
  pre.dim = 2;
  const ContentEncoder precomputed(pre);
  EXPECT_JURY_ERROR(ResolveComposition(p, Text("probe"), &precomputed), ErrorCode::kEncoderRequired);
}

TEST(ResolveComposition, EmptyPolicyIsOneOpenSheet) {
  const auto c = ResolveComposition(ConditionalJuryPolicy{}, Text("anything"), nullptr);
  ASSERT_EQ(c.sheets.size(), 1u);
  EXPECT_EQ(c.sheets[0].seats, 12);
  EXPECT_TRUE(c.sheets[0].constraints.empty());
}

TEST(ResolveComposition, AlwaysFillsTheJury) {
  ConditionalJuryPolicy p = Hashtags();
  p.n_jurors = 15;
  for (const auto* t : {"#metoo", "#blm", "plain", ""}) {
    EXPECT_EQ(Seats(ResolveComposition(p, Text(t), nullptr)), 15) << t;
  }
}

TEST(ExplainResolution, SecondRuleFires) {
  const ContentEncoder e = RandomEncoder();
  ConditionalJuryPolicy p;
  p.default_sheets = {{"base", {}, 6}};
  p.rules = {Near("far", "completely unrelated words", 0.05, {{"k", "a"}}),
             Keyword("kw", "#metoo", {{"k", "b"}})};
  const Item item = Text("a #metoo story");
  const auto trace = ExplainResolution(p, item, &e);
  ASSERT_EQ(trace.evaluated.size(), 2u);
  EXPECT_FALSE(trace.evaluated[0].matched);
  ASSERT_TRUE(trace.evaluated[0].distance.has_value());
  const double expected =
      CosineDistance(e.Encode(Text("completely unrelated words")), e.Encode(item));
  EXPECT_EQ(*trace.evaluated[0].distance, expected);
  EXPECT_GE(expected, 0.05);
  EXPECT_TRUE(trace.evaluated[1].matched);
  EXPECT_FALSE(trace.evaluated[1].distance.has_value());
  ASSERT_TRUE(trace.fired.has_value());
  EXPECT_EQ(*trace.fired, 1u);
}

TEST(ExplainResolution, EmptyRules) {
  const auto trace = ExplainResolution(ConditionalJuryPolicy{}, Text("x"), nullptr);
  EXPECT_TRUE(trace.evaluated.empty());
  EXPECT_FALSE(trace.fired.has_value());
}

TEST(ExplainResolution, KeywordOnEmptyText) {
  const auto trace = ExplainResolution(Hashtags(), Text(""), nullptr);
  ASSERT_EQ(trace.evaluated.size(), 2u);
  EXPECT_FALSE(trace.evaluated[0].matched);
  EXPECT_FALSE(trace.evaluated[1].matched);
  EXPECT_FALSE(trace.fired.has_value());
}

TEST(ExplainResolution, MissingEncoderIsNotedNotThrown) {
  ConditionalJuryPolicy p;
  p.rules = {Near("topic", "probe", 0.5, {}), Keyword("kw", "probe", {})};
  const auto trace = ExplainResolution(p, Text("probe"), nullptr);
  ASSERT_EQ(trace.evaluated.size(), 2u);
  EXPECT_FALSE(trace.evaluated[0].matched);
  ASSERT_TRUE(trace.evaluated[0].error.has_value());
  EXPECT_NE(trace.evaluated[0].error->find("EncoderRequired"), std::string::npos);
  EXPECT_EQ(trace.fired, std::optional<std::size_t>(1));
}

TEST(ConditionalJuryPolicy, Validation) {
  ConditionalJuryPolicy p = Hashtags();
  p.rules[0].patch[0].seats = 7;
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidComposition);
  p = Hashtags();
  p.default_sheets[0].seats = 13;
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidComposition);
  p = Hashtags();
  p.rules[1].patch[0].seats = 0;
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidComposition);
  p = Hashtags();
  p.rules[0].predicate.term.clear();
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidArgument);
  p = Hashtags();
  p.rules.push_back(Near("bad", "x", 2.5, {}));
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidArgument);
  p.rules.back().predicate.max_distance = -0.1;
  EXPECT_JURY_ERROR(p.Validate(), ErrorCode::kInvalidArgument);
  p.rules.back().predicate.max_distance = 2.0;
  EXPECT_NO_THROW(p.Validate());
}

TEST(CosineDistance, HandValues) {
  const std::vector<double> x{1, 0}, y{0, 1}, z{-2, 0}, w{3, 3}, zero{0, 0};
  EXPECT_EQ(CosineDistance(x, x), 0.0);
  EXPECT_NEAR(CosineDistance(x, y), 1.0, 1e-15);
  EXPECT_NEAR(CosineDistance(x, z), 2.0, 1e-15);
  EXPECT_NEAR(CosineDistance(x, w), 1.0 - 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(CosineDistance(zero, zero), 1.0);
  EXPECT_EQ(CosineDistance(x, zero), 1.0);
  EXPECT_JURY_ERROR(CosineDistance(x, std::vector<double>{1.0}), ErrorCode::kShapeMismatch);
}

}  // namespace
}  // namespace jury
