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

#ifndef JURY_JURY_HPP_
#define JURY_JURY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/error.hpp"
#include "jury/model.hpp"
#include "jury/rng.hpp"

namespace jury {

inline constexpr int kDefaultJurySize = 12;
inline constexpr double kToxicityThreshold = 1.0;

// Who may fill `seats` jury slots: annotators matching every constraint.
struct JurorSheet {
  std::string sheet_id;
  Constraints constraints;
  int seats = 1;

  bool operator==(const JurorSheet&) const = default;
};

struct JuryComposition {
  std::vector<JurorSheet> sheets;
  int n_jurors = kDefaultJurySize;

  int TotalSeats() const;
  // n_jurors = sum of seats; empty sheet ids become "A", "B", ...
  static JuryComposition FromSheets(std::vector<JurorSheet> sheets);

  bool operator==(const JuryComposition&) const = default;
};

struct CompositionIssue {
  ErrorCode code;
  std::string sheet_id;
  int required = 0;
  int available = 0;
  std::string message;
};

// Every problem with `composition`: seat accounting, schema, per-sheet pool
// size, then joint satisfiability of overlapping sheets. Empty means valid.
std::vector<CompositionIssue> CheckComposition(const Dataset& dataset,
                                               const JuryComposition& composition);
// Throws the first issue as an Error.
void ValidateComposition(const Dataset& dataset, const JuryComposition& composition);

struct JurorSeat {
  std::size_t sheet_index = 0;
  std::string sheet_id;
  std::size_t annotator_index = 0;  // into dataset.annotators()
  std::string annotator_id;
  double predicted = 0.0;  // clamped model score; filled by the verdict path
};

struct SampledJury {
  std::size_t trial = 0;
  std::vector<JurorSeat> seats;  // composition order
  double mean = 0.0;
};

// Seat filling for one validated composition. Sheets are filled most
// specific (smallest pool) first; chosen annotators leave every later pool.
class JurorSampler {
 public:
  JurorSampler(const Dataset& dataset, const JuryComposition& composition);

  // Uniform without replacement within the jury. Retries a bounded number of
  // times when overlapping sheets exhaust a pool, then throws
  // InsufficientAnnotators.
  SampledJury Sample(Rng& rng) const;

  const std::vector<std::vector<std::size_t>>& pools() const { return pools_; }
  // Sorted union of all sheet pools.
  std::vector<std::size_t> EligibleUnion() const;

 private:
  const Dataset* dataset_;
  JuryComposition composition_;
  std::vector<std::vector<std::size_t>> pools_;
  std::vector<std::size_t> fill_order_;
};

SampledJury SampleJury(const Dataset& dataset, const JuryComposition& composition, Rng& rng);

struct VerdictConfig {
  std::size_t n_trials = 100;
  double threshold = kToxicityThreshold;
  double lower_quantile = 0.025;
  double upper_quantile = 0.975;
  std::uint64_t seed = 0;
  // Worker threads for per-annotator prediction and trials; results are
  // identical for every value.
  std::size_t threads = 1;

  void Validate() const;
};

struct Verdict {
  std::vector<double> trial_means;
  double score = 0.0;  // median of trial_means
  bool toxic = false;  // score >= threshold
  double interval_low = 0.0;
  double interval_high = 0.0;
  double toxic_fraction = 0.0;  // share of trials with mean >= threshold
  double nontoxic_fraction = 0.0;
  std::size_t median_trial = 0;
  SampledJury median_jury;
  double threshold = kToxicityThreshold;
  std::uint64_t seed = 0;

  // Fractions of the median jury voting each way.
  double VoteFraction(bool toxic_vote) const;
};

// Median; even counts average the two middle values.
double MedianOfMeans(std::span<const double> trial_means);
// Linear interpolation between order statistics; `sorted` ascending.
double Quantile(std::span<const double> sorted, double q);

// Aggregates already-realized trials (means must be filled).
Verdict VerdictFromTrials(std::vector<SampledJury> trials, const VerdictConfig& config);

// Clamped predictions for the given dataset annotators on `item`, indexed by
// position in `annotators`.
std::vector<double> PredictAnnotators(const JuryModel& model, const Dataset& dataset,
                                      const Item& item, std::span<const std::size_t> annotators,
                                      std::size_t threads = 1);

// n_trials independent juries; trial t draws from stream DeriveSeed(seed, t).
Verdict JuryVerdict(const JuryModel& model, const Dataset& dataset,
                    const JuryComposition& composition, const Item& item,
                    const VerdictConfig& config);

struct JurorAnnotation {
  std::string item_id;
  std::string text;
  double observed = 0.0;
  double predicted = 0.0;
};

struct JurorDetails {
  AnnotatorProfile profile;
  std::vector<JurorAnnotation> annotations;  // ordered by item_id
  std::optional<double> mae;                 // absent without annotations
};

JurorDetails GetJurorDetails(const JuryModel& model, const Dataset& dataset,
                             const std::string& annotator_id);

struct TrendGroup {
  std::string key;
  std::vector<std::string> juror_ids;
  std::vector<double> juror_predictions;
  double mean_predicted = 0.0;
  std::size_t population_size = 0;
  std::vector<std::size_t> population_histogram;
  std::vector<std::size_t> juror_bins;  // histogram bin of each sampled juror
};

struct JuryTrends {
  std::string group_by;
  std::vector<double> bin_edges;  // n_bins + 1 edges over [0, 4]
  std::vector<TrendGroup> groups;
};

// Groups the verdict's median jury by "sheet", "decision" or an attribute and
// places each group against its population's predicted labels. Attribute
// groups without sampled jurors are omitted.
JuryTrends ComputeJuryTrends(const JuryModel& model, const Dataset& dataset,
                             const JuryComposition& composition, const Item& item,
                             const Verdict& verdict, const std::string& group_by,
                             std::size_t n_bins = 8);

std::size_t HistogramBin(double score, std::size_t n_bins);

}  // namespace jury

#endif  // JURY_JURY_HPP_
