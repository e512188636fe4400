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

#ifndef JURY_COUNTERFACTUAL_HPP_
#define JURY_COUNTERFACTUAL_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jury/jury.hpp"

namespace jury {

// Required margin past the threshold when the flip is strict.
inline constexpr double kStrictMargin = 1e-9;

struct GroupScores {
  std::vector<std::string> groups;
  std::vector<double> s;  // predicted score per group
  int n_jurors = kDefaultJurySize;
  // Optional per-group seat ceilings (e.g. eligible pool sizes).
  std::optional<std::vector<int>> capacity;

  void Validate() const;
};

using Allocation = std::vector<int>;

// sum_k p_k s_k / n_jurors.
double JuryValue(const GroupScores& scores, std::span<const int> allocation);

enum class FlipDirection {
  kAuto,  // away from the side of the threshold the current allocation is on
  kUp,    // reach v > threshold (v >= when not strict)
  kDown,  // reach v < threshold (v <= when not strict)
};

struct CounterfactualOptions {
  double threshold = kToxicityThreshold;
  bool strict = true;
  FlipDirection direction = FlipDirection::kAuto;
};

struct CounterfactualResult {
  Allocation p_star;
  long long cost = 0;  // sum_k (p_k - p*_k)^2
  double v_before = 0.0;
  double v_after = 0.0;
  FlipDirection direction = FlipDirection::kUp;  // resolved, never kAuto
  std::vector<std::string> edits;  // e.g. "A: 12 -> 7 (-5)"
};

// True when `allocation` lands on the target side for `direction`
// (kUp or kDown) under `options`.
bool MeetsTarget(const GroupScores& scores, std::span<const int> allocation,
                 FlipDirection direction, const CounterfactualOptions& options);

// The `k_best` lowest-cost allocations meeting the target, ordered by cost
// then lexicographically. Exhaustive for small K, branch-and-bound with a
// Lagrangian relaxation bound otherwise. Empty when infeasible.
std::vector<CounterfactualResult> SolveCounterfactuals(const GroupScores& scores,
                                                       std::span<const int> current,
                                                       const CounterfactualOptions& options,
                                                       std::size_t k_best);

// Minimal-edit allocation on the other side of the threshold; throws
// Infeasible or InvalidAllocation.
CounterfactualResult FindCounterfactual(const GroupScores& scores, std::span<const int> current,
                                        const CounterfactualOptions& options = {});

struct CounterfactualRow {
  CounterfactualResult result;
  JuryComposition composition;  // sheets with zero seats dropped
};

struct CounterfactualTable {
  GroupScores scores;
  Allocation current;
  std::vector<CounterfactualRow> rows;
  std::optional<std::string> infeasible_reason;
};

struct CounterfactualTableOptions {
  CounterfactualOptions solver;
  // Cap each sheet's seats at its eligible pool size.
  bool respect_capacity = true;
  std::size_t threads = 1;
};

// s_k = mean clamped prediction over every annotator eligible for sheet k.
GroupScores SheetScores(const JuryModel& model, const Dataset& dataset,
                        const JuryComposition& composition, const Item& item,
                        bool respect_capacity = true, std::size_t threads = 1);

CounterfactualTable ComputeCounterfactualTable(const JuryModel& model, const Dataset& dataset,
                                               const JuryComposition& composition,
                                               const Item& item, std::size_t k_best,
                                               const CounterfactualTableOptions& options = {});

}  // namespace jury

#endif  // JURY_COUNTERFACTUAL_HPP_
