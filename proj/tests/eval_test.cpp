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

#include <cmath>
#include <random>

#include "jury/eval.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace jury {
namespace {

using testing::ScriptedModel;

Item Emb(std::string id, double v) { return Item{std::move(id), "t " + id, std::vector<double>{v}}; }

// Two items (embeddings 1 and 2), two annotators.
Dataset TwoByTwo(double x2_on_i1) {
  return Dataset({Emb("i0", 1.0), Emb("i1", 2.0)},
                 {{"x1", {{"side", "l"}}}, {"x2", {{"side", "r"}}}},
                 {{"x1", "i0", 1.0}, {"x1", "i1", 2.0}, {"x2", "i0", 1.0}, {"x2", "i1", x2_on_i1}});
}

TEST(PerAnnotatorMae, HandValues) {
  const Dataset d = TwoByTwo(2.0);
  EXPECT_EQ(PerAnnotatorMae(ScriptedModel(d, {}), d).mae, 0.0);
  EXPECT_EQ(PerAnnotatorMae(ScriptedModel(d, {{"x1", 1.0}, {"x2", 1.0}}), d).mae, 1.0);
  // Predictions clamp at 4: errors 3 and 2 per annotator.
  EXPECT_EQ(PerAnnotatorMae(ScriptedModel(d, {{"x1", 5.0}, {"x2", 5.0}}), d).mae, 2.5);
  // Errors {0.5, 0.5} for x1 and {0, 1} for x2.
  const Dataset e = TwoByTwo(1.0);
  const auto stats = PerAnnotatorMae(ScriptedModel(e, {{"x1", 0.5}}), e);
  EXPECT_EQ(stats.mae, 0.5);
  EXPECT_EQ(stats.n_annotations, 4u);
  EXPECT_EQ(stats.n_annotators, 2u);
  const auto only_r = PerAnnotatorMae(ScriptedModel(e, {{"x1", 0.5}}), e, Constraints{{"side", "r"}});
  EXPECT_EQ(only_r.mae, 0.5);
  EXPECT_EQ(only_r.n_annotators, 1u);
}

TEST(PerAnnotatorMae, FilterErrors) {
  const Dataset d = TwoByTwo(2.0);
  const JuryModel m = ScriptedModel(d, {});
  EXPECT_JURY_ERROR(PerAnnotatorMae(m, d, Constraints{{"shoe", "l"}}), ErrorCode::kUnknownAttribute);
  EXPECT_JURY_ERROR(PerAnnotatorMae(m, d, Constraints{{"side", "up"}}), ErrorCode::kUnknownValue);
  // A declared value with no annotations left in the test set.
  const Dataset only_l(d.items(), d.annotators(), {{"x1", "i0", 1.0}});
  EXPECT_JURY_ERROR(PerAnnotatorMae(m, only_l, Constraints{{"side", "r"}}), ErrorCode::kEmptyFilter);
}

TEST(PerAnnotatorMae, PartitionRecombinesToWhole) {
  const Dataset d = testing::TenAnnotatorDataset(true);
  std::map<std::string, double> offsets;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (const auto& a : d.annotators()) offsets[a.annotator_id] = u(rng);
  const JuryModel m = ScriptedModel(d, offsets);
  const auto whole = PerAnnotatorMae(m, d);
  double weighted = 0.0;
  std::size_t n = 0;
  for (const auto* g : {"female", "male", "nonbinary"}) {
    const auto s = PerAnnotatorMae(m, d, Constraints{{"gender", g}});
    weighted += s.mae * static_cast<double>(s.n_annotations);
    n += s.n_annotations;
  }
  EXPECT_EQ(n, whole.n_annotations);
  EXPECT_NEAR(weighted / static_cast<double>(n), whole.mae, 1e-12);
  EXPECT_EQ(PerAnnotatorMae(m, d, std::nullopt, 3).mae, whole.mae);
}

// ---- disagreement ------------------------------------------------------------------

std::vector<Annotation> Labels(const std::string& item, std::vector<double> scores) {
  std::vector<Annotation> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({"r" + std::to_string(i), item, scores[i]});
  return out;
}

DisagreementOptions Raw() {
  DisagreementOptions o;
  o.binarize = false;
  return o;
}

TEST(DisagreementRate, HandFixtures) {
  EXPECT_EQ(DisagreementRate(Labels("c", {0, 2})).rate, 1.0);
  const auto three = DisagreementRate(Labels("c", {0, 0, 3}));
  EXPECT_EQ(three.disagreeing, 2u);
  EXPECT_EQ(three.pairs, 3u);
  EXPECT_TRUE(three.exact);
  EXPECT_DOUBLE_EQ(three.rate, 2.0 / 3.0);
  EXPECT_EQ(DisagreementRate(Labels("c", {2, 2, 2, 2})).rate, 0.0);
  // 1 and 2 both binarize to toxic; raw they differ.
  EXPECT_EQ(DisagreementRate(Labels("c", {1, 2, 2})).rate, 0.0);
  EXPECT_DOUBLE_EQ(DisagreementRate(Labels("c", {1, 2, 2}), Raw()).rate, 2.0 / 3.0);
}

TEST(DisagreementRate, PairsPoolAcrossItems) {
  auto anns = Labels("a", {0, 2});     // 1 of 1
  auto more = Labels("b", {0, 0, 3});  // 2 of 3
  anns.insert(anns.end(), more.begin(), more.end());
  anns.push_back({"solo", "c", 4.0});  // no pair
  const auto s = DisagreementRate(anns);
  EXPECT_EQ(s.disagreeing, 3u);
  EXPECT_EQ(s.pairs, 4u);
  EXPECT_EQ(s.rate, 0.75);
}

TEST(DisagreementRate, NoPairs) {
  EXPECT_JURY_ERROR(DisagreementRate(Labels("c", {1})), ErrorCode::kNoPairs);
  EXPECT_JURY_ERROR(DisagreementRate(std::vector<Annotation>{}), ErrorCode::kNoPairs);
}

std::vector<Annotation> RandomAnnotations(std::uint64_t seed, int items, int max_labels) {
  std::mt19937_64 rng(seed);
  std::vector<Annotation> out;
  for (int i = 0; i < items; ++i) {
    const int m = 1 + static_cast<int>(rng() % max_labels);
    for (int j = 0; j < m; ++j) {
      out.push_back({"r" + std::to_string(j), "c" + std::to_string(i), static_cast<double>(rng() % 5)});
    }
  }
  return out;
}

TEST(DisagreementRate, MatchesPairLoopAndIgnoresOrder) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto anns = RandomAnnotations(seed, 30, 7);
    std::map<std::string, std::vector<double>> by_item;
    for (const auto& a : anns) by_item[a.item_id].push_back(a.score);
    for (bool binarize : {true, false}) {
      DisagreementOptions o;
      o.binarize = binarize;
      const auto got = DisagreementRate(anns, o);
      const auto want = oracle::CountPairs(by_item, binarize, o.threshold);
      EXPECT_EQ(static_cast<long long>(got.disagreeing), want.disagree);
      EXPECT_EQ(static_cast<long long>(got.pairs), want.total);
      std::mt19937_64 rng(seed);
      auto shuffled = anns;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      EXPECT_EQ(DisagreementRate(shuffled, o).rate, got.rate);
    }
  }
}

TEST(DisagreementRate, SampledModeEstimatesExactRate) {
  const auto anns = RandomAnnotations(99, 400, 8);
  const auto exact = DisagreementRate(anns);
  ASSERT_TRUE(exact.exact);
  DisagreementOptions o;
  o.n_pairs = 2000;
  o.seed = 5;
  ASSERT_GT(exact.pairs, o.n_pairs);
  const auto sampled = DisagreementRate(anns, o);
  EXPECT_FALSE(sampled.exact);
  EXPECT_EQ(sampled.pairs, 2000u);
  const double se = std::sqrt(exact.rate * (1 - exact.rate) / 2000.0);
  EXPECT_LT(std::abs(sampled.rate - exact.rate), 4 * se);
  EXPECT_EQ(DisagreementRate(anns, o).disagreeing, sampled.disagreeing);
}

// ---- jury-level MAE ----------------------------------------------------------------

Dataset ThreeAnnotatorItems(std::vector<std::pair<double, std::vector<double>>> items) {
  std::vector<Item> it;
  std::vector<Annotation> anns;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string id = "c" + std::to_string(i);
    it.push_back(Emb(id, items[i].first));
    for (std::size_t j = 0; j < items[i].second.size(); ++j) {
      anns.push_back({"r" + std::to_string(j), id, items[i].second[j]});
    }
  }
  return Dataset(std::move(it), {{"r0", {}}, {"r1", {}}, {"r2", {}}}, std::move(anns));
}

TEST(JuryLevelMae, HandFixtures) {
  // Per-annotator error is hidden by averaging: |mean(1,1,1) - mean(0,1,2)| = 0.
  // Second item: |2 - 4| = 2.
  const Dataset a = ThreeAnnotatorItems({{1.0, {0, 1, 2}}, {2.0, {4, 4, 4}}});
  const auto ra = JuryLevelMaeOf(ScriptedModel(a, {}), a, 3);
  EXPECT_EQ(ra.n_items, 2u);
  EXPECT_EQ(ra.mae, 1.0);
  // Offsets {0.5, -0.5, 1.3}: mean prediction emb + 0.4.
  const Dataset b = ThreeAnnotatorItems({{1.0, {1, 2, 3}}, {0.5, {0, 0, 1}}});
  const JuryModel mb = ScriptedModel(b, {{"r0", 0.5}, {"r1", -0.5}, {"r2", 1.3}});
  const auto rb = JuryLevelMaeOf(mb, b, 3);
  const double item0 = std::abs((1.5 + 0.5 + 2.3) / 3.0 - 2.0);
  const double item1 = std::abs((1.0 + 0.0 + 1.8) / 3.0 - 1.0 / 3.0);
  EXPECT_NEAR(rb.mae, (item0 + item1) / 2.0, 1e-12);
  // Items below min_annotators are skipped; clamping applies per prediction.
  const Dataset c = ThreeAnnotatorItems({{3.5, {4, 4, 4}}, {0.0, {1, 1}}});
  const JuryModel mc = ScriptedModel(c, {{"r0", 1.0}, {"r1", 0.0}, {"r2", -4.0}});
  const auto rc = JuryLevelMaeOf(mc, c, 3);
  EXPECT_EQ(rc.n_items, 1u);
  EXPECT_NEAR(rc.mae, std::abs((4.0 + 3.5 + 0.0) / 3.0 - 4.0), 1e-12);
  EXPECT_EQ(JuryLevelMaeOf(mc, c, 2).n_items, 2u);
}

TEST(JuryLevelMae, NoQualifyingItems) {
  const Dataset a = ThreeAnnotatorItems({{1.0, {0, 1, 2}}});
  EXPECT_JURY_ERROR(JuryLevelMaeOf(ScriptedModel(a, {}), a), ErrorCode::kNoQualifyingItems);
}

TEST(TwoProportionZ, PooledTextbookValue) {
  EXPECT_NEAR(TwoProportionZ(46, 99, 37, 99), 1.2962451313485372, 1e-12);
  EXPECT_NEAR(TwoProportionZ(37, 99, 46, 99), -1.2962451313485372, 1e-12);
  EXPECT_EQ(TwoProportionZ(5, 10, 5, 10), 0.0);
  EXPECT_EQ(TwoProportionZ(0, 10, 0, 10), 0.0);
  EXPECT_JURY_ERROR(TwoProportionZ(0, 0, 1, 2), ErrorCode::kInvalidArgument);
}

// ---- flips -------------------------------------------------------------------------

// Raw output c0 + c1 * g(annotator) for content [c0, c1]: the cross layer
// multiplies c1 by (a + 1), so g = a + 1 is stored as a = g - 1.
JuryModel InteractionModel(const Dataset& d, const std::map<std::string, double>& g, double unknown_g) {
  ModelConfig c;
  c.embedding_dim = 1;
  c.cross_layers = 1;
  c.deep_layers = {1};
  c.include_groups = false;
  c.encoder.kind = EncoderKind::kPrecomputed;
  c.encoder.dim = 2;
  c.encoder.trainable = false;
  JuryModel m = JuryModel::Initialize(c, d, 1);
  testing::ZeroParameters(m);
  Tensor* table = testing::FindBlock(m, "annotators");
  for (std::size_t r = 0; r < m.annotator_ids().size(); ++r) {
    auto it = g.find(m.annotator_ids()[r]);
    table->at(r, 0) = (it == g.end() ? 0.0 : it->second) - 1.0;
  }
  table->at(m.unknown_annotator_row(), 0) = unknown_g - 1.0;
  testing::FindBlock(m, "cross.0.w")->at(1, 2) = 1.0;
  Tensor* w = testing::FindBlock(m, "deep.0.w");
  w->at(0, 0) = 1.0;
  w->at(0, 1) = 1.0;
  testing::FindBlock(m, "deep.0.b")->at(0, 0) = 100.0;
  testing::FindBlock(m, "output.w")->at(0, 0) = 1.0;
  testing::FindBlock(m, "output.b")->at(0, 0) = -100.0;
  return m;
}

// 20 items, every fourth a topic item [0.5, 1], the rest [0.5, 0]. Twelve G
// annotators and twelve others label everything; on topic items G says 3.
struct FlipFixture {
  Dataset dataset;
  std::map<std::string, double> g;
};

FlipFixture MakeFlipFixture() {
  std::vector<Item> items;
  for (int i = 0; i < 20; ++i) {
    items.push_back({"t" + std::to_string(i), "item", std::vector<double>{0.5, i % 4 == 0 ? 1.0 : 0.0}});
  }
  std::vector<AnnotatorProfile> people;
  FlipFixture f;
  for (int j = 0; j < 24; ++j) {
    const bool in_g = j < 12;
    const std::string id = (in_g ? "g" : "o") + std::to_string(j);
    people.push_back({id, {{"team", in_g ? "G" : "other"}}});
    f.g[id] = in_g ? 2.5 : 0.0;
  }
  std::vector<Annotation> anns;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 24; ++j) {
      const bool topic = i % 4 == 0;
      double score = j < 12 && topic ? 3.0 : 0.0;
      if (!topic && j == (i % 24)) score = 1.0;  // a little noise off-topic
      anns.push_back({people[j].annotator_id, items[i].item_id, score});
    }
  }
  f.dataset = Dataset(std::move(items), std::move(people), std::move(anns));
  return f;
}

JuryComposition Teams(int g, int other) {
  std::vector<JurorSheet> sheets;
  if (g > 0) sheets.push_back({"G", {{"team", "G"}}, g});
  if (other > 0) sheets.push_back({"O", {{"team", "other"}}, other});
  return JuryComposition::FromSheets(std::move(sheets));
}

VerdictConfig Trials(std::size_t n = 20) {
  VerdictConfig v;
  v.n_trials = n;
  v.seed = 11;
  return v;
}

TEST(FlipAnalysis, IdenticalBehaviorNeverFlips) {
  const FlipFixture f = MakeFlipFixture();
  // Everyone behaves like the baseline's unknown annotator.
  std::map<std::string, double> same;
  for (const auto& [id, g] : f.g) same[id] = 0.2;
  const JuryModel m = InteractionModel(f.dataset, same, 0.2);
  const auto r = FlipAnalysis(m, m, f.dataset, {{"mixed", Teams(6, 6)}}, Trials());
  ASSERT_EQ(r.compositions.size(), 1u);
  EXPECT_EQ(r.compositions[0].n_flipped, 0u);
  EXPECT_EQ(r.compositions[0].flip_rate, 0.0);
  EXPECT_FALSE(r.compositions[0].z.has_value());
}

TEST(FlipAnalysis, GroupJuryFlipsTopicItems) {
  const FlipFixture f = MakeFlipFixture();
  const JuryModel m = InteractionModel(f.dataset, f.g, 0.0);
  // Baseline scores 0.7 on topic items and 0.5 elsewhere.
  const JuryModel baseline = InteractionModel(f.dataset, {}, 0.2);
  ASSERT_NEAR(baseline.Predict(f.dataset.item(0), {}), 0.7, 1e-12);
  const auto r = FlipAnalysis(m, baseline, f.dataset,
                              {{"all_g", Teams(12, 0)}, {"no_g", Teams(0, 12)},
                               {"too_many", Teams(13, 0)}},
                              Trials(), 2);
  ASSERT_EQ(r.compositions.size(), 2u);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0].name, "too_many");
  EXPECT_NE(r.dropped[0].reason.find("InsufficientAnnotators"), std::string::npos);

  const auto& all_g = r.compositions[0];
  EXPECT_EQ(all_g.name, "all_g");
  EXPECT_EQ(all_g.n_items, 20u);
  EXPECT_EQ(all_g.n_flipped, 5u);
  EXPECT_EQ(all_g.flip_rate, 0.25);
  // Flipped items: 12 labels of 3 and 12 of 0, so 144 of 276 pairs disagree.
  EXPECT_EQ(all_g.flipped.pairs, 5u * 276u);
  EXPECT_EQ(all_g.flipped.disagreeing, 5u * 144u);
  // Unflipped: one label of 1 among 23 zeros, 23 of 276 pairs.
  EXPECT_EQ(all_g.unflipped.pairs, 15u * 276u);
  EXPECT_EQ(all_g.unflipped.disagreeing, 15u * 23u);
  ASSERT_TRUE(all_g.z.has_value());
  EXPECT_NEAR(*all_g.z, TwoProportionZ(720, 1380, 345, 4140), 1e-12);
  EXPECT_GT(*all_g.z, 1.96);

  EXPECT_EQ(r.compositions[1].n_flipped, 0u);
  EXPECT_EQ(r.mean_flip_rate, 0.125);
  // Pooled across compositions, with item ids kept apart per composition.
  EXPECT_EQ(r.flipped.pairs, 5u * 276u);
  EXPECT_EQ(r.unflipped.pairs, 35u * 276u);
}

TEST(FlipAnalysis, InvariantToItemRelabeling) {
  const FlipFixture f = MakeFlipFixture();
  std::vector<Item> items = f.dataset.items();
  std::vector<Annotation> anns = f.dataset.annotations();
  for (auto& it : items) it.item_id = "renamed_" + it.item_id;
  for (auto& a : anns) a.item_id = "renamed_" + a.item_id;
  const Dataset renamed(items, f.dataset.annotators(), anns);
  const auto run = [&](const Dataset& d) {
    return FlipAnalysis(InteractionModel(d, f.g, 0.0), InteractionModel(d, {}, 0.2), d,
                        {{"mixed", Teams(6, 6)}}, Trials());
  };
  const auto a = run(f.dataset), b = run(renamed);
  EXPECT_EQ(a.compositions[0].n_flipped, b.compositions[0].n_flipped);
  EXPECT_EQ(a.flipped.disagreeing, b.flipped.disagreeing);
}

// ---- grouped report ----------------------------------------------------------------

TEST(GroupedMae, RowsPerValueWithOverallFirst) {
  const Dataset d = TwoByTwo(1.0);
  const JuryModel full = ScriptedModel(d, {{"x1", 0.5}});
  const JuryModel base = ScriptedModel(d, {});
  const auto report = GroupedMae({&base, nullptr, &full}, d, {"side"});
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].group, "overall");
  EXPECT_EQ(report.rows[0].n_annotators, 2u);
  EXPECT_EQ(report.rows[0].full, 0.5);
  EXPECT_EQ(report.rows[0].baseline, 0.25);
  EXPECT_FALSE(report.rows[0].group_only.has_value());
  EXPECT_EQ(report.rows[1].group, "side=l");
  EXPECT_EQ(report.rows[1].full, 0.5);
  EXPECT_EQ(report.rows[1].baseline, 0.0);
  EXPECT_EQ(report.rows[2].group, "side=r");
  EXPECT_EQ(report.rows[2].full, 0.5);
  EXPECT_EQ(report.rows[2].baseline, 0.5);
  const std::string text = report.ToText();
  EXPECT_NE(text.find("side=r"), std::string::npos);
  EXPECT_NE(text.find("0.2500"), std::string::npos);
  EXPECT_NE(text.find(" -"), std::string::npos);
  EXPECT_JURY_ERROR(GroupedMae({&base, nullptr, nullptr}, d, {"shoe"}), ErrorCode::kUnknownAttribute);
}

}  // namespace
}  // namespace jury
