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

#include "jury/jury.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "parallel.hpp"

namespace jury {

namespace {

constexpr int kMaxSampleAttempts = 64;

std::string DefaultSheetId(std::size_t index) {
  std::string id;
  std::size_t n = index;
  do {
    id.insert(id.begin(), static_cast<char>('A' + n % 26));
    n = n / 26;
  } while (n-- > 0);
  return id;
}

std::vector<std::size_t> FillOrder(const std::vector<std::vector<std::size_t>>& pools) {
  std::vector<std::size_t> order(pools.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pools[a].size() < pools[b].size();
  });
  return order;
}

// Capacitated bipartite matching of sheets (seats) to annotators. Returns
// seats filled per sheet; sheets are augmented in `order`, so any shortfall
// is charged to the least specific sheets.
std::vector<int> MatchSeats(const std::vector<std::vector<std::size_t>>& pools,
                            const std::vector<int>& seats, const std::vector<std::size_t>& order,
                            std::size_t n_annotators) {
  constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(n_annotators, kFree);
  std::vector<int> filled(pools.size(), 0);
  std::vector<char> visited(n_annotators);

  auto augment = [&](auto&& self, std::size_t sheet) -> bool {
    for (std::size_t a : pools[sheet]) {
      if (visited[a]) continue;
      visited[a] = 1;
      if (owner[a] == kFree || self(self, owner[a])) {
        owner[a] = sheet;
        return true;
      }
    }
    return false;
  };
  for (std::size_t s : order) {
    for (int k = 0; k < seats[s]; ++k) {
      std::fill(visited.begin(), visited.end(), 0);
      if (!augment(augment, s)) break;
      ++filled[s];
    }
  }
  return filled;
}

Error ToError(const CompositionIssue& issue) {
  std::string detail = "sheet=" + issue.sheet_id;
  if (issue.code == ErrorCode::kInsufficientAnnotators) {
    detail += " required=" + std::to_string(issue.required) +
              " available=" + std::to_string(issue.available);
  }
  return Error(issue.code, issue.message, detail);
}

PredictionRequest RequestFor(const AnnotatorProfile& profile) {
  return PredictionRequest{profile.annotator_id, profile.attributes};
}

}  // namespace

int JuryComposition::TotalSeats() const {
  int total = 0;
  for (const auto& s : sheets) total += s.seats;
  return total;
}

JuryComposition JuryComposition::FromSheets(std::vector<JurorSheet> sheets) {
  JuryComposition c;
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    if (sheets[i].sheet_id.empty()) sheets[i].sheet_id = DefaultSheetId(i);
  }
  c.sheets = std::move(sheets);
  c.n_jurors = c.TotalSeats();
  return c;
}

std::vector<CompositionIssue> CheckComposition(const Dataset& dataset,
                                               const JuryComposition& composition) {
  std::vector<CompositionIssue> issues;
  auto invalid = [&](const std::string& sheet, std::string message) {
    issues.push_back({ErrorCode::kInvalidComposition, sheet, 0, 0, std::move(message)});
  };
  if (composition.n_jurors < 1) invalid("", "n_jurors must be at least 1");
  if (composition.sheets.empty()) invalid("", "composition has no juror sheets");
  std::set<std::string> ids;
  for (const auto& sheet : composition.sheets) {
    if (sheet.seats < 1) invalid(sheet.sheet_id, "sheet seats must be at least 1");
    if (!ids.insert(sheet.sheet_id).second) invalid(sheet.sheet_id, "duplicate sheet id");
  }
  if (composition.TotalSeats() != composition.n_jurors) {
    invalid("", "sheet seats sum to " + std::to_string(composition.TotalSeats()) +
                    ", expected n_jurors=" + std::to_string(composition.n_jurors));
  }
  bool schema_ok = true;
  for (const auto& sheet : composition.sheets) {
    try {
      ValidateConstraints(dataset.schema(), sheet.constraints);
    } catch (const Error& e) {
      schema_ok = false;
      issues.push_back({e.code(), sheet.sheet_id, 0, 0, std::string(e.what()) + ": " + e.detail()});
    }
  }
  if (!schema_ok || !issues.empty()) return issues;

  std::vector<std::vector<std::size_t>> pools;
  std::vector<int> seats;
  for (const auto& sheet : composition.sheets) {
    pools.push_back(EligibleAnnotators(dataset, sheet.constraints));
    seats.push_back(sheet.seats);
  }
  for (std::size_t s = 0; s < pools.size(); ++s) {
    const int available = static_cast<int>(pools[s].size());
    if (available < seats[s]) {
      issues.push_back({ErrorCode::kInsufficientAnnotators, composition.sheets[s].sheet_id,
                        seats[s], available, "not enough eligible annotators for sheet"});
    }
  }
  if (!issues.empty()) return issues;

  const auto order = FillOrder(pools);
  const auto filled = MatchSeats(pools, seats, order, dataset.annotators().size());
  for (std::size_t s : order) {
    if (filled[s] < seats[s]) {
      issues.push_back({ErrorCode::kInsufficientAnnotators, composition.sheets[s].sheet_id,
                        seats[s], filled[s],
                        "overlapping sheets compete for the same annotators"});
    }
  }
  return issues;
}

void ValidateComposition(const Dataset& dataset, const JuryComposition& composition) {
  const auto issues = CheckComposition(dataset, composition);
  if (!issues.empty()) throw ToError(issues.front());
}

JurorSampler::JurorSampler(const Dataset& dataset, const JuryComposition& composition)
    : dataset_(&dataset), composition_(composition) {
  ValidateComposition(dataset, composition);
  for (const auto& sheet : composition_.sheets) {
    pools_.push_back(EligibleAnnotators(dataset, sheet.constraints));
  }
  fill_order_ = FillOrder(pools_);
}

std::vector<std::size_t> JurorSampler::EligibleUnion() const {
  std::vector<std::size_t> all;
  for (const auto& p : pools_) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

SampledJury JurorSampler::Sample(Rng& rng) const {
  const std::size_t n_sheets = pools_.size();
  std::vector<std::vector<std::size_t>> picks(n_sheets);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> candidates;
  std::string short_sheet;
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    chosen.clear();
    bool ok = true;
    for (std::size_t s : fill_order_) {
      const auto seats = static_cast<std::size_t>(composition_.sheets[s].seats);
      candidates.clear();
      for (std::size_t a : pools_[s]) {
        if (std::find(chosen.begin(), chosen.end(), a) == chosen.end()) candidates.push_back(a);
      }
      if (candidates.size() < seats) {
        ok = false;
        short_sheet = composition_.sheets[s].sheet_id;
        break;
      }
      picks[s].clear();
      for (std::size_t j = 0; j < seats; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, candidates.size() - 1);
        std::swap(candidates[j], candidates[pick(rng)]);
        picks[s].push_back(candidates[j]);
        chosen.push_back(candidates[j]);
      }
    }
    if (!ok) continue;
    SampledJury jury;
    for (std::size_t s = 0; s < n_sheets; ++s) {
      for (std::size_t a : picks[s]) {
        jury.seats.push_back({s, composition_.sheets[s].sheet_id, a,
                              dataset_->annotator(a).annotator_id, 0.0});
      }
    }
    return jury;
  }
  throw Error(ErrorCode::kInsufficientAnnotators, "could not fill overlapping sheets",
              "sheet=" + short_sheet + " attempts=" + std::to_string(kMaxSampleAttempts));
}

SampledJury SampleJury(const Dataset& dataset, const JuryComposition& composition, Rng& rng) {
  return JurorSampler(dataset, composition).Sample(rng);
}

void VerdictConfig::Validate() const {
  if (n_trials < 1) throw Error(ErrorCode::kInvalidArgument, "n_trials must be at least 1");
  if (!(threshold >= kMinScore && threshold <= kMaxScore)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in [0, 4]");
  }
  if (!(lower_quantile >= 0.0 && lower_quantile <= upper_quantile && upper_quantile <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "quantiles must satisfy 0 <= lower <= upper <= 1");
  }
}

double Verdict::VoteFraction(bool toxic_vote) const {
  if (median_jury.seats.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& seat : median_jury.seats) {
    if ((seat.predicted >= threshold) == toxic_vote) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(median_jury.seats.size());
}

double MedianOfMeans(std::span<const double> trial_means) {
  if (trial_means.empty()) throw Error(ErrorCode::kInvalidArgument, "no trial means");
  std::vector<double> v(trial_means.begin(), trial_means.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kInvalidArgument, "no values");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Verdict VerdictFromTrials(std::vector<SampledJury> trials, const VerdictConfig& config) {
  config.Validate();
  if (trials.empty()) throw Error(ErrorCode::kInvalidArgument, "no trials");
  Verdict v;
  v.threshold = config.threshold;
  v.seed = config.seed;
  v.trial_means.reserve(trials.size());
  for (const auto& t : trials) v.trial_means.push_back(t.mean);
  v.score = MedianOfMeans(v.trial_means);
  v.toxic = v.score >= config.threshold;

  std::vector<double> sorted = v.trial_means;
  std::sort(sorted.begin(), sorted.end());
  v.interval_low = Quantile(sorted, config.lower_quantile);
  v.interval_high = Quantile(sorted, config.upper_quantile);

  std::size_t toxic_trials = 0;
  for (double m : v.trial_means) {
    if (m >= config.threshold) ++toxic_trials;
  }
  v.toxic_fraction = static_cast<double>(toxic_trials) / static_cast<double>(trials.size());
  v.nontoxic_fraction = 1.0 - v.toxic_fraction;

  std::size_t best = 0;
  for (std::size_t t = 1; t < v.trial_means.size(); ++t) {
    if (std::abs(v.trial_means[t] - v.score) < std::abs(v.trial_means[best] - v.score)) best = t;
  }
  v.median_trial = best;
  v.median_jury = std::move(trials[best]);
  return v;
}

std::vector<double> PredictAnnotators(const JuryModel& model, const Dataset& dataset,
                                      const Item& item, std::span<const std::size_t> annotators,
                                      std::size_t threads) {
  const std::vector<double> content = model.encoder().Encode(item);
  std::vector<double> out(annotators.size());
  internal::ParallelFor(annotators.size(), threads, [&](std::size_t i) {
    const auto rows = model.Resolve(RequestFor(dataset.annotator(annotators[i])));
    out[i] = std::clamp(model.ForwardEncoded(content, rows), kMinScore, kMaxScore);
  });
  return out;
}

Verdict JuryVerdict(const JuryModel& model, const Dataset& dataset,
                    const JuryComposition& composition, const Item& item,
                    const VerdictConfig& config) {
  config.Validate();
  const JurorSampler sampler(dataset, composition);
  const auto eligible = sampler.EligibleUnion();
  const auto scores = PredictAnnotators(model, dataset, item, eligible, config.threads);
  std::vector<double> by_annotator(dataset.annotators().size(),
                                   std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < eligible.size(); ++i) by_annotator[eligible[i]] = scores[i];

  std::vector<SampledJury> trials(config.n_trials);
  internal::ParallelFor(config.n_trials, config.threads, [&](std::size_t t) {
    Rng rng = MakeStream(config.seed, t);
    SampledJury jury = sampler.Sample(rng);
    jury.trial = t;
    double sum = 0.0;
    for (auto& seat : jury.seats) {
      seat.predicted = by_annotator[seat.annotator_index];
      sum += seat.predicted;
    }
    jury.mean = sum / static_cast<double>(jury.seats.size());
    trials[t] = std::move(jury);
  });
  return VerdictFromTrials(std::move(trials), config);
}

JurorDetails GetJurorDetails(const JuryModel& model, const Dataset& dataset,
                             const std::string& annotator_id) {
  const auto index = dataset.FindAnnotator(annotator_id);
  if (!index) throw Error(ErrorCode::kUnknownAnnotator, "unknown annotator", annotator_id);
  JurorDetails details;
  details.profile = dataset.annotator(*index);
  const PredictionRequest request = RequestFor(details.profile);
  for (std::size_t k : dataset.AnnotationsOfAnnotator(*index)) {
    const Annotation& a = dataset.annotations()[k];
    const Item& item = dataset.item(dataset.ItemIndexOf(a));
    details.annotations.push_back({a.item_id, item.text, a.score, model.Predict(item, request)});
  }
  std::sort(details.annotations.begin(), details.annotations.end(),
            [](const JurorAnnotation& x, const JurorAnnotation& y) { return x.item_id < y.item_id; });
  if (!details.annotations.empty()) {
    double sum = 0.0;
    for (const auto& a : details.annotations) sum += std::abs(a.predicted - a.observed);
    details.mae = sum / static_cast<double>(details.annotations.size());
  }
  return details;
}

std::size_t HistogramBin(double score, std::size_t n_bins) {
  const double width = (kMaxScore - kMinScore) / static_cast<double>(n_bins);
  const double clamped = std::clamp(score, kMinScore, kMaxScore);
  const auto bin = static_cast<std::size_t>(std::floor((clamped - kMinScore) / width));
  return std::min(bin, n_bins - 1);
}

JuryTrends ComputeJuryTrends(const JuryModel& model, const Dataset& dataset,
                             const JuryComposition& composition, const Item& item,
                             const Verdict& verdict, const std::string& group_by,
                             std::size_t n_bins) {
  if (n_bins < 1) throw Error(ErrorCode::kInvalidArgument, "n_bins must be at least 1");
  const bool by_sheet = group_by == "sheet";
  const bool by_decision = group_by == "decision";
  if (!by_sheet && !by_decision && !dataset.schema().HasAttribute(group_by)) {
    throw Error(ErrorCode::kUnknownAttribute, "unknown group_by attribute", group_by);
  }
  if (verdict.median_jury.seats.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "verdict carries no median jury");
  }

  const JurorSampler sampler(dataset, composition);
  const auto eligible = sampler.EligibleUnion();
  const auto scores = PredictAnnotators(model, dataset, item, eligible);
  std::vector<double> by_annotator(dataset.annotators().size(),
                                   std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < eligible.size(); ++i) by_annotator[eligible[i]] = scores[i];

  JuryTrends trends;
  trends.group_by = group_by;
  for (std::size_t b = 0; b <= n_bins; ++b) {
    trends.bin_edges.push_back(kMinScore + (kMaxScore - kMinScore) * static_cast<double>(b) /
                                               static_cast<double>(n_bins));
  }

  // Group keys in display order, with the population of each.
  std::vector<std::string> keys;
  std::vector<std::vector<std::size_t>> populations;
  auto key_of_annotator = [&](std::size_t a) -> std::string {
    if (by_decision) return by_annotator[a] >= verdict.threshold ? "toxic" : "nontoxic";
    return dataset.annotator(a).attributes.at(group_by);
  };
  if (by_sheet) {
    for (std::size_t s = 0; s < composition.sheets.size(); ++s) {
      keys.push_back(composition.sheets[s].sheet_id);
      populations.push_back(sampler.pools()[s]);
    }
  } else {
    keys = by_decision ? std::vector<std::string>{"toxic", "nontoxic"}
                       : dataset.schema().values.at(group_by);
    populations.resize(keys.size());
    for (std::size_t a : eligible) {
      const auto pos = std::find(keys.begin(), keys.end(), key_of_annotator(a));
      if (pos != keys.end()) populations[pos - keys.begin()].push_back(a);
    }
  }

  for (std::size_t g = 0; g < keys.size(); ++g) {
    TrendGroup group;
    group.key = keys[g];
    for (const auto& seat : verdict.median_jury.seats) {
      const bool member =
          by_sheet ? seat.sheet_index == g
          : by_decision
              ? (seat.predicted >= verdict.threshold ? "toxic" : "nontoxic") == keys[g]
              : dataset.annotator(seat.annotator_index).attributes.at(group_by) == keys[g];
      if (!member) continue;
      group.juror_ids.push_back(seat.annotator_id);
      group.juror_predictions.push_back(seat.predicted);
      group.juror_bins.push_back(HistogramBin(seat.predicted, n_bins));
    }
    if (group.juror_ids.empty() && !by_sheet) continue;
    if (!group.juror_predictions.empty()) {
      group.mean_predicted =
          std::accumulate(group.juror_predictions.begin(), group.juror_predictions.end(), 0.0) /
          static_cast<double>(group.juror_predictions.size());
    }
    group.population_size = populations[g].size();
    group.population_histogram.assign(n_bins, 0);
    for (std::size_t a : populations[g]) ++group.population_histogram[HistogramBin(by_annotator[a], n_bins)];
    trends.groups.push_back(std::move(group));
  }
  return trends;
}

}  // namespace jury
