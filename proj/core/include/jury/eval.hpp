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

#ifndef JURY_EVAL_HPP_
#define JURY_EVAL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/jury.hpp"
#include "jury/model.hpp"

namespace jury {

struct MaeStats {
  double mae = 0.0;
  std::size_t n_annotations = 0;
  std::size_t n_annotators = 0;  // distinct annotators contributing
};

// Mean |clamped prediction - observed| over the annotations of annotators
// matching `filter` (all annotators when absent). Throws EmptyFilter.
MaeStats PerAnnotatorMae(const JuryModel& model, const Dataset& test,
                         const std::optional<Constraints>& filter = std::nullopt,
                         std::size_t threads = 1);

struct DisagreementOptions {
  bool binarize = true;
  double threshold = kToxicityThreshold;
  // Pairs enumerated exactly when the dataset holds at most this many;
  // otherwise this many are sampled.
  std::size_t n_pairs = 100000;
  std::uint64_t seed = 0;
};

struct DisagreementStats {
  double rate = 0.0;
  std::size_t disagreeing = 0;
  std::size_t pairs = 0;
  bool exact = false;
};

// Share of same-item annotation pairs whose labels differ (after
// binarization when enabled). Throws NoPairs.
DisagreementStats DisagreementRate(std::span<const Annotation> annotations,
                                   const DisagreementOptions& options = {});

struct JuryLevelMae {
  double mae = 0.0;
  std::size_t n_items = 0;
};

// Per item with >= min_annotators labels: |mean prediction - mean observed|
// over that item's annotators, averaged. Throws NoQualifyingItems.
JuryLevelMae JuryLevelMaeOf(const JuryModel& model, const Dataset& dataset,
                            std::size_t min_annotators = 10, std::size_t threads = 1);

// Pooled two-proportion z for x1/n1 against x2/n2.
double TwoProportionZ(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2);

struct NamedComposition {
  std::string name;
  JuryComposition composition;
};

struct CompositionFlips {
  std::string name;
  std::size_t n_items = 0;
  std::size_t n_flipped = 0;
  double flip_rate = 0.0;
  DisagreementStats flipped;    // observed-label pairs on flipped items
  DisagreementStats unflipped;  // and on the rest
  std::optional<double> z;      // absent when either side has no pairs
};

struct DroppedComposition {
  std::string name;
  std::string reason;
};

struct FlipReport {
  std::vector<CompositionFlips> compositions;
  std::vector<DroppedComposition> dropped;  // failed validation
  double mean_flip_rate = 0.0;
  // Pairs pooled over every composition.
  DisagreementStats flipped;
  DisagreementStats unflipped;
  std::optional<double> z;
};

// Jury verdict against the baseline's item-level score, both binarized at
// verdict.threshold. Infeasible compositions are dropped and reported.
FlipReport FlipAnalysis(const JuryModel& model, const JuryModel& baseline, const Dataset& dataset,
                        const std::vector<NamedComposition>& compositions,
                        const VerdictConfig& verdict, std::size_t threads = 1);

struct GroupedMaeRow {
  std::string group;  // "attribute=value" or "overall"
  std::size_t n_annotators = 0;
  std::optional<double> baseline;
  std::optional<double> group_only;
  std::optional<double> full;
};

struct GroupedMaeReport {
  std::vector<GroupedMaeRow> rows;  // overall row first

  std::string ToText() const;
};

struct ReportModels {
  const JuryModel* baseline = nullptr;
  const JuryModel* group_only = nullptr;
  const JuryModel* full = nullptr;
};

// One row per value of each `group_by` attribute that has test annotations,
// after the overall row.
GroupedMaeReport GroupedMae(const ReportModels& models, const Dataset& test,
                            const std::vector<std::string>& group_by, std::size_t threads = 1);

}  // namespace jury

#endif  // JURY_EVAL_HPP_
