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

#include "jury/eval.hpp"
#include "jury/synthetic.hpp"
#include "jury/trainer.hpp"
#include "test_support.hpp"

namespace jury {
namespace {

using testing::TempDir;
using testing::TinyConfig;

TrainConfig Epochs(std::size_t joint, std::size_t frozen, std::uint64_t seed = 1) {
  TrainConfig t;
  t.joint_epochs = joint;
  t.frozen_epochs = frozen;
  t.seed = seed;
  return t;
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const Dataset d = testing::TenAnnotatorDataset();
  const JuryModel trained = Train(d, TinyConfig(), Epochs(0, 0, 21));
  const JuryModel init = JuryModel::Initialize(TinyConfig(), d, 21);
  EXPECT_TRUE(trained.SameParameters(init));
  EXPECT_EQ(trained.metadata().epochs_run, 0u);
}

TEST(Train, EmptyDatasetRejected) {
  const Dataset d(testing::NumberedItems(2, false), testing::TenAnnotators(), {});
  EXPECT_JURY_ERROR(Train(d, TinyConfig(), Epochs(1, 0)), ErrorCode::kEmptyDataset);
}

TEST(Train, DivergenceReportsNonFiniteLoss) {
  const Dataset d = testing::TenAnnotatorDataset();
  TrainConfig t = Epochs(0, 30);
  t.lr_dense = 1e100;
  t.lr_embedding = 1e100;
  t.lr_encoder = 1e100;
  EXPECT_JURY_ERROR(Train(d, TinyConfig(), t), ErrorCode::kNonFiniteLoss);
}

TEST(Train, OverfitsSinglePoint) {
  const Dataset d({{"c1", "only comment", std::nullopt}}, {{"x1", {{"gender", "f"}}}},
                  {{"x1", "c1", 3.0}});
  TrainConfig t = Epochs(0, 500);
  t.batch_size = 1;
  t.unknown_substitution_rate = 0.0;
  const JuryModel m = Train(d, TinyConfig(), t);
  EXPECT_EQ(m.metadata().steps, 500u);
  EXPECT_LT(std::abs(m.Forward(d.item(0), {"x1", std::nullopt}) - 3.0), 0.05);
}

TEST(Train, MemorizesOppositeAnnotators) {
  const Dataset d({{"c1", "same comment", std::nullopt}},
                  {{"x1", {{"gender", "f"}}}, {"x2", {{"gender", "f"}}}},
                  {{"x1", "c1", 0.0}, {"x2", "c1", 4.0}});
  TrainConfig t = Epochs(0, 400);
  t.batch_size = 2;
  t.lr_embedding = 1e-2;
  t.unknown_substitution_rate = 0.0;
  const JuryModel m = Train(d, TinyConfig(), t);
  const double p1 = m.Forward(d.item(0), {"x1", std::nullopt});
  const double p2 = m.Forward(d.item(0), {"x2", std::nullopt});
  EXPECT_GT(p2 - p1, 2.0) << p1 << " " << p2;
}

TEST(Train, SameSeedGivesIdenticalCheckpoints) {
  const Dataset d = testing::TenAnnotatorDataset();
  TempDir dir;
  SaveCheckpoint(Train(d, TinyConfig(), Epochs(1, 2, 5)), dir / "a.ckpt");
  SaveCheckpoint(Train(d, TinyConfig(), Epochs(1, 2, 5)), dir / "b.ckpt");
  EXPECT_EQ(testing::ReadBytes(dir / "a.ckpt"), testing::ReadBytes(dir / "b.ckpt"));
  EXPECT_EQ(testing::ReadBytes(dir / "a.ckpt.json"), testing::ReadBytes(dir / "b.ckpt.json"));
  SaveCheckpoint(Train(d, TinyConfig(), Epochs(1, 2, 6)), dir / "c.ckpt");
  EXPECT_NE(testing::ReadBytes(dir / "a.ckpt"), testing::ReadBytes(dir / "c.ckpt"));
}

TEST(Train, EncoderFrozenAfterJointEpochs) {
  const Dataset d = testing::TenAnnotatorDataset();
  JuryModel joint_only = Train(d, TinyConfig(), Epochs(2, 0, 3));
  JuryModel both = Train(d, TinyConfig(), Epochs(2, 3, 3));
  EXPECT_TRUE(both.metadata().encoder_frozen);
  EXPECT_EQ(both.metadata().epochs_run, 5u);
  EXPECT_EQ(both.metadata().epoch_losses.size(), 5u);
  EXPECT_EQ(testing::FindBlock(joint_only, "encoder.buckets")->data,
            testing::FindBlock(both, "encoder.buckets")->data);
  EXPECT_NE(testing::FindBlock(joint_only, "output.w")->data,
            testing::FindBlock(both, "output.w")->data);
}

TEST(Train, FullBatchIgnoresRecordOrder) {
  Dataset d = testing::TenAnnotatorDataset();
  std::vector<Annotation> reversed(d.annotations().rbegin(), d.annotations().rend());
  const Dataset r(d.items(), d.annotators(), reversed);
  TrainConfig t = Epochs(1, 3, 8);
  t.batch_size = d.annotations().size();
  t.unknown_substitution_rate = 0.0;
  JuryModel a = Train(d, TinyConfig(), t);
  JuryModel b = Train(r, TinyConfig(), t);
  const auto ba = a.Blocks(), bb = b.Blocks();
  ASSERT_EQ(ba.size(), bb.size());
  for (std::size_t i = 0; i < ba.size(); ++i) {
    for (std::size_t k = 0; k < ba[i]->data.size(); ++k) {
      ASSERT_NEAR(ba[i]->data[k], bb[i]->data[k], 1e-9) << ba[i]->name;
    }
  }
}

TEST(AggregateExamples, TargetIsItemMean) {
  const Dataset d({{"c1", "t", std::nullopt}}, {{"x1", {}}, {"x2", {}}},
                  {{"x1", "c1", 0.0}, {"x2", "c1", 4.0}});
  const auto ex = AggregateExamples(d);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].target, 2.0);
}

TEST(TrainBaselineAggregate, AnnotatorAgnostic) {
  const Dataset d = testing::TenAnnotatorDataset();
  const JuryModel m = TrainBaselineAggregate(d, TinyConfig(), Epochs(1, 1));
  EXPECT_EQ(m.kind(), ModelKind::kAggregate);
  for (const auto& item : d.items()) {
    const double first = m.Forward(item, {"a01", std::nullopt});
    for (const auto& a : d.annotators()) {
      EXPECT_EQ(m.Forward(item, {a.annotator_id, std::nullopt}), first);
    }
  }
}

TEST(TrainGroupOnly, IdenticalAttributesIdenticalPredictions) {
  const Dataset d = testing::TenAnnotatorDataset();
  const JuryModel m = TrainGroupOnly(d, TinyConfig(), Epochs(1, 2));
  EXPECT_FALSE(m.config().include_annotator_id);
  // a06 and a07 are both male and White.
  for (const auto& item : d.items()) {
    EXPECT_EQ(m.Forward(item, {"a06", std::nullopt}), m.Forward(item, {"a07", std::nullopt}));
  }
}

// ---- synthetic comparisons ---------------------------------------------------------

ModelConfig SmallConfig() {
  ModelConfig c;
  c.embedding_dim = 8;
  c.cross_layers = 2;
  c.deep_layers = {32, 16};
  c.encoder.dim = 16;
  c.encoder.buckets = 512;
  return c;
}

struct HeldOut {
  double full, group_only, aggregate;
};

HeldOut HeldOutMae(const SyntheticSpec& spec) {
  auto [all, oracle] = GenerateSynthetic(spec);
  auto [train, test] = SplitByItem(all, 0.2, 4);
  TrainConfig t = Epochs(2, 6, 9);
  t.lr_dense = 3e-3;
  t.lr_embedding = 1e-2;
  t.lr_encoder = 1e-2;
  return {PerAnnotatorMae(Train(train, SmallConfig(), t), test).mae,
          PerAnnotatorMae(TrainGroupOnly(train, SmallConfig(), t), test).mae,
          PerAnnotatorMae(TrainBaselineAggregate(train, SmallConfig(), t), test).mae};
}

SyntheticSpec BaseSpec() {
  SyntheticSpec s;
  s.attribute_values = {{"gender", {"a", "b", "c"}}, {"age", {"young", "old"}}};
  s.n_items = 800;
  s.n_annotators = 120;
  s.labels_per_item = 5;
  s.vocab_size = 150;
  s.seed = 17;
  return s;
}

TEST(SyntheticComparison, NoEffectsAggregateMatchesFull) {
  SyntheticSpec s = BaseSpec();
  s.annotator_sigma = 0.0;
  const HeldOut r = HeldOutMae(s);
  EXPECT_LT(std::abs(r.aggregate - r.full), 0.05) << r.aggregate << " " << r.full;
}

TEST(SyntheticComparison, GroupEffectsOnlyGroupOnlyMatchesFull) {
  SyntheticSpec s = BaseSpec();
  s.annotator_sigma = 0.0;
  s.group_effects = {{"gender", "a", 1.0, false}, {"gender", "c", -0.8, false}};
  const HeldOut r = HeldOutMae(s);
  EXPECT_LT(std::abs(r.group_only - r.full), 0.05) << r.group_only << " " << r.full;
  EXPECT_LT(r.group_only, r.aggregate);
}

TEST(SyntheticComparison, AnnotatorOffsetsFavorFullModel) {
  SyntheticSpec s = BaseSpec();
  s.annotator_sigma = 1.0;
  s.observation_sigma = 0.3;
  const HeldOut r = HeldOutMae(s);
  EXPECT_GT(r.group_only - r.full, 0.1) << r.group_only << " " << r.full;
}

}  // namespace
}  // namespace jury
