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

#include "jury/json_io.hpp"
#include "test_support.hpp"

namespace jury {
namespace {

TEST(ParseComposition, BareArrayOfSheets) {
  const auto c = ParseComposition(Json::parse(R"([
    {"jurors": 4, "gender_identity": "female"},
    {"jurors": 4, "gender_identity": "nonbinary"},
    {"jurors": 4, "gender_identity": "male"}
  ])"));
  EXPECT_EQ(c.n_jurors, 12);
  ASSERT_EQ(c.sheets.size(), 3u);
  EXPECT_EQ(c.sheets[1].seats, 4);
  EXPECT_EQ(c.sheets[1].constraints, (Constraints{{"gender_identity", "nonbinary"}}));
  EXPECT_EQ(c.sheets[2].sheet_id, "C");
}

TEST(ParseComposition, ObjectFormAndExplicitConstraints) {
  const auto c = ParseComposition(Json::parse(R"({"n_jurors": 5, "sheets": [
    {"jurors": 2, "sheet_id": "left", "constraints": {"race": "Black"}},
    {"seats": 3}
  ]})"));
  EXPECT_EQ(c.n_jurors, 5);
  EXPECT_EQ(c.sheets[0].sheet_id, "left");
  EXPECT_EQ(c.sheets[0].constraints, (Constraints{{"race", "Black"}}));
  EXPECT_TRUE(c.sheets[1].constraints.empty());
  EXPECT_EQ(ParseComposition(CompositionToJson(c)).sheets, c.sheets);
}

TEST(ParseComposition, Rejections) {
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"([{"gender": "f"}])")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"([{"jurors": "4"}])")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"([{"jurors": 2.5}])")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"([{"jurors": 0}])")), ErrorCode::kInvalidComposition);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"([{"jurors": 1, "gender": 3}])")),
                    ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse(R"({"sheets": [], "extra": 1})")),
                    ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseComposition(Json::parse("7")), ErrorCode::kInvalidArgument);
}

TEST(ParseVerdictConfig, OverlaysAndValidates) {
  VerdictConfig base;
  base.n_trials = 7;
  const auto c = ParseVerdictConfig(Json::parse(R"({"seed": 42, "threshold": 2.0})"), base);
  EXPECT_EQ(c.n_trials, 7u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.threshold, 2.0);
  EXPECT_EQ(ParseVerdictConfig(Json(nullptr), base).n_trials, 7u);
  EXPECT_JURY_ERROR(ParseVerdictConfig(Json::parse(R"({"n_trials": 0})")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseVerdictConfig(Json::parse(R"({"seed": -1})")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParseVerdictConfig(Json::parse(R"({"trials": 3})")), ErrorCode::kInvalidArgument);
}

TEST(VerdictToJson, OutputShape) {
  const Dataset d = testing::TenAnnotatorDataset(true);
  // On item 0 (embedding 0) female and nonbinary jurors predict 2, male jurors 0.
  std::map<std::string, double> offsets;
  for (const auto& a : d.annotators()) {
    offsets[a.annotator_id] = a.attributes.at("gender") == "male" ? 0.0 : 2.0;
  }
  const JuryModel m = testing::ScriptedModel(d, offsets);
  const auto c = JuryComposition::FromSheets(
      {{"", {{"gender", "female"}}, 4}, {"", {{"gender", "nonbinary"}}, 3}, {"", {{"gender", "male"}}, 3}});
  VerdictConfig cfg;
  cfg.n_trials = 5;
  cfg.seed = 3;
  const Verdict v = JuryVerdict(m, d, c, d.item(0), cfg);
  const Json j = VerdictToJson(v, d);
  EXPECT_EQ(j["verdict"], "toxic");
  EXPECT_DOUBLE_EQ(j["votes"]["toxic"].get<double>(), 0.7);
  EXPECT_DOUBLE_EQ(j["votes"]["nontoxic"].get<double>(), 0.3);
  EXPECT_EQ(j["population"]["toxic"], 1.0);
  EXPECT_EQ(j["population"]["nontoxic"], 0.0);
  ASSERT_EQ(j["jurors"].size(), 10u);
  for (const auto& juror : j["jurors"]) {
    EXPECT_TRUE(juror.contains("juror_id"));
    EXPECT_TRUE(juror.contains("gender"));
    EXPECT_TRUE(juror.contains("race"));
    EXPECT_EQ(juror["vote"], juror["gender"] == "male" ? "nontoxic" : "toxic");
  }
  EXPECT_EQ(j["trial_means"].size(), 5u);
  EXPECT_EQ(j["interval"].size(), 2u);
  EXPECT_EQ(j["seed"], 3u);
  EXPECT_EQ(j["n_trials"], 5u);
  EXPECT_DOUBLE_EQ(j["score"].get<double>(), 1.4);
}

TEST(ParsePolicy, RoundTrip) {
  const Json in = Json::parse(R"({
    "n_jurors": 12,
    "default": [{"jurors": 6}],
    "rules": [
      {"name": "metoo", "when": {"keyword_contains": "#metoo"},
       "patch": [{"jurors": 6, "gender_identity": "female"}]},
      {"name": "blm", "priority": 2,
       "when": {"embedding_within": {"probe": "#blm", "max_distance": 0.05}},
       "patch": [{"jurors": 6, "racial_identity": "Black"}]}
    ]
  })");
  const auto p = ParsePolicy(in);
  ASSERT_EQ(p.rules.size(), 2u);
  EXPECT_EQ(p.rules[0].predicate.kind, PredicateKind::kKeywordContains);
  EXPECT_EQ(p.rules[1].predicate.kind, PredicateKind::kEmbeddingWithin);
  EXPECT_EQ(p.rules[1].predicate.max_distance, 0.05);
  EXPECT_EQ(p.rules[1].priority, 2);
  const auto again = ParsePolicy(PolicyToJson(p));
  EXPECT_EQ(again.rules, p.rules);
  EXPECT_EQ(again.default_sheets, p.default_sheets);
  EXPECT_EQ(again.n_jurors, 12);
}

TEST(ParsePolicy, Rejections) {
  EXPECT_JURY_ERROR(ParsePolicy(Json::parse(R"({"rules": [{"patch": []}]})")), ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParsePolicy(Json::parse(R"({"rules": [{"when": {"regex": "x"}, "patch": []}]})")),
                    ErrorCode::kInvalidArgument);
  EXPECT_JURY_ERROR(ParsePolicy(Json::parse(R"({"default": [{"jurors": 13}]})")),
                    ErrorCode::kInvalidComposition);
}

TEST(SchemaToJson, CountsAndOmitsEmptyAttributes) {
  const Dataset ten = testing::TenAnnotatorDataset();
  const Json s = SchemaToJson(ten);
  EXPECT_EQ(s["attributes"]["gender"]["female"], 4);
  EXPECT_EQ(s["attributes"]["gender"]["male"], 3);
  EXPECT_EQ(s["attributes"]["race"]["Black"], 4);
  EXPECT_EQ(s["n_annotators"], 10u);
  EXPECT_EQ(s["n_items"], 4u);

  AttributeSchema schema;
  schema.names = {"gender", "unused"};
  schema.values = {{"gender", {"f"}}, {"unused", {}}};
  // Annotators without a value would fill in "undisclosed", so leave none.
  const Dataset d({{"c1", "t", std::nullopt}}, {}, {}, &schema);
  const Json j = SchemaToJson(d);
  EXPECT_EQ(j["attributes"]["gender"]["f"], 0);
  EXPECT_FALSE(j["attributes"].contains("unused"));
}

TEST(CounterfactualToJson, Fields) {
  GroupScores g;
  g.groups = {"A", "B"};
  g.s = {0.5, 2.0};
  const auto r = FindCounterfactual(g, std::vector<int>{12, 0});
  const Json j = CounterfactualToJson(r, 1.0);
  EXPECT_EQ(j["p_star"], Json::parse("[7, 5]"));
  EXPECT_EQ(j["cost"], 50);
  EXPECT_EQ(j["direction"], "up");
  EXPECT_EQ(j["verdict_after"], "toxic");
  EXPECT_EQ(j["edits"][0], "A: 12 -> 7 (-5)");
  const auto parsed = ParseGroupScores(Json::parse(R"({"groups": ["A", "B"], "s": [0.5, 2.0]})"));
  EXPECT_EQ(parsed.s, g.s);
  EXPECT_EQ(parsed.n_jurors, 12);
}

}  // namespace
}  // namespace jury
