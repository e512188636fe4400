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

#include "jury/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "jury/error.hpp"
#include "parallel.hpp"

namespace jury {

namespace {

// Clamped prediction for every annotation, indexed like dataset.annotations().
std::vector<double> PredictAnnotations(const JuryModel& model, const Dataset& dataset,
                                       std::size_t threads) {
  std::vector<double> out(dataset.annotations().size());
  internal::ParallelFor(dataset.items().size(), threads, [&](std::size_t i) {
    const auto& anns = dataset.AnnotationsOfItem(i);
    if (anns.empty()) return;
    const auto content = model.encoder().Encode(dataset.item(i));
    JuryModel::Workspace ws;
    for (std::size_t k : anns) {
      const auto& a = dataset.annotations()[k];
      const auto& profile = dataset.annotator(dataset.AnnotatorIndexOf(a));
      const auto rows = model.Resolve({profile.annotator_id, profile.attributes});
      out[k] = std::clamp(model.ForwardEncoded(content, rows, ws), kMinScore, kMaxScore);
    }
  });
  return out;
}

bool Matches(const AnnotatorProfile& profile, const Constraints& filter) {
  for (const auto& [name, value] : filter) {
    auto it = profile.attributes.find(name);
    if (it == profile.attributes.end() || it->second != value) return false;
  }
  return true;
}

std::optional<MaeStats> MaeOver(const Dataset& dataset, const std::vector<double>& predictions,
                                const std::optional<Constraints>& filter) {
  double sum = 0.0;
  MaeStats stats;
  for (std::size_t a = 0; a < dataset.annotators().size(); ++a) {
    if (filter && !Matches(dataset.annotator(a), *filter)) continue;
    const auto& anns = dataset.AnnotationsOfAnnotator(a);
    if (anns.empty()) continue;
    ++stats.n_annotators;
    for (std::size_t k : anns) {
      sum += std::abs(predictions[k] - dataset.annotations()[k].score);
      ++stats.n_annotations;
    }
  }
  if (stats.n_annotations == 0) return std::nullopt;
  stats.mae = sum / static_cast<double>(stats.n_annotations);
  return stats;
}

std::size_t PairCount(std::size_t m) { return m * (m - 1) / 2; }

}  // namespace

MaeStats PerAnnotatorMae(const JuryModel& model, const Dataset& test,
                         const std::optional<Constraints>& filter, std::size_t threads) {
  if (filter) ValidateConstraints(test.schema(), *filter);
  const auto stats = MaeOver(test, PredictAnnotations(model, test, threads), filter);
  if (!stats) throw Error(ErrorCode::kEmptyFilter, "no test annotations match the filter");
  return *stats;
}

DisagreementStats DisagreementRate(std::span<const Annotation> annotations,
                                   const DisagreementOptions& options) {
  std::map<std::string, std::vector<double>> by_item;
  for (const auto& a : annotations) {
    double v = a.score;
    if (options.binarize) v = a.score >= options.threshold ? 1.0 : 0.0;
    by_item[a.item_id].push_back(v);
  }
  std::vector<const std::vector<double>*> items;
  std::vector<double> weights;
  std::size_t total = 0;
  for (const auto& [id, labels] : by_item) {
    if (labels.size() < 2) continue;
    items.push_back(&labels);
    weights.push_back(static_cast<double>(PairCount(labels.size())));
    total += PairCount(labels.size());
  }
  if (total == 0) throw Error(ErrorCode::kNoPairs, "no item has two or more annotations");

  DisagreementStats stats;
  if (total <= options.n_pairs) {
    stats.exact = true;
    for (const auto* labels : items) {
      // Pairs that differ = all pairs - pairs within each equal-label class.
      std::map<double, std::size_t> counts;
      for (double v : *labels) ++counts[v];
      std::size_t same = 0;
      for (const auto& [v, c] : counts) same += PairCount(c);
      stats.disagreeing += PairCount(labels->size()) - same;
    }
    stats.pairs = total;
  } else {
    Rng rng(options.seed);
    std::discrete_distribution<std::size_t> pick_item(weights.begin(), weights.end());
    for (std::size_t s = 0; s < options.n_pairs; ++s) {
      const auto& labels = *items[pick_item(rng)];
      std::uniform_int_distribution<std::size_t> first(0, labels.size() - 1);
      std::uniform_int_distribution<std::size_t> second(0, labels.size() - 2);
      const std::size_t i = first(rng);
      std::size_t j = second(rng);
      if (j >= i) ++j;
      if (labels[i] != labels[j]) ++stats.disagreeing;
    }
    stats.pairs = options.n_pairs;
  }
  stats.rate = static_cast<double>(stats.disagreeing) / static_cast<double>(stats.pairs);
  return stats;
}

JuryLevelMae JuryLevelMaeOf(const JuryModel& model, const Dataset& dataset,
                            std::size_t min_annotators, std::size_t threads) {
  const auto predictions = PredictAnnotations(model, dataset, threads);
  JuryLevelMae out;
  double sum = 0.0;
  for (std::size_t i = 0; i < dataset.items().size(); ++i) {
    const auto& anns = dataset.AnnotationsOfItem(i);
    if (anns.empty() || anns.size() < min_annotators) continue;
    double observed = 0.0, predicted = 0.0;
    for (std::size_t k : anns) {
      observed += dataset.annotations()[k].score;
      predicted += predictions[k];
    }
    const double n = static_cast<double>(anns.size());
    sum += std::abs(predicted / n - observed / n);
    ++out.n_items;
  }
  if (out.n_items == 0) {
    throw Error(ErrorCode::kNoQualifyingItems, "no item has enough annotations",
                "min_annotators=" + std::to_string(min_annotators));
  }
  out.mae = sum / static_cast<double>(out.n_items);
  return out;
}

double TwoProportionZ(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw Error(ErrorCode::kInvalidArgument, "empty proportion sample");
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double p = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(p * (1.0 - p) * (1.0 / double(n1) + 1.0 / double(n2)));
  if (se == 0.0) return 0.0;
  return (p1 - p2) / se;
}

FlipReport FlipAnalysis(const JuryModel& model, const JuryModel& baseline, const Dataset& dataset,
                        const std::vector<NamedComposition>& compositions,
                        const VerdictConfig& verdict, std::size_t threads) {
  verdict.Validate();
  const std::size_t n_items = dataset.items().size();
  if (n_items == 0) throw Error(ErrorCode::kEmptyDataset, "dataset has no items");
  std::vector<char> baseline_toxic(n_items);
  internal::ParallelFor(n_items, threads, [&](std::size_t i) {
    baseline_toxic[i] = baseline.Predict(dataset.item(i), {}) >= verdict.threshold;
  });

  VerdictConfig per_item = verdict;
  per_item.threads = 1;
  DisagreementOptions exact;
  exact.threshold = verdict.threshold;
  exact.n_pairs = static_cast<std::size_t>(-1);

  FlipReport report;
  std::vector<Annotation> pooled_flipped, pooled_unflipped;
  double flip_sum = 0.0;
  for (const auto& named : compositions) {
    const auto issues = CheckComposition(dataset, named.composition);
    if (!issues.empty()) {
      report.dropped.push_back({named.name, std::string(ErrorCodeName(issues.front().code)) +
                                                ": " + issues.front().message});
      continue;
    }
    std::vector<char> flipped(n_items);
    internal::ParallelFor(n_items, threads, [&](std::size_t i) {
      const Verdict v = JuryVerdict(model, dataset, named.composition, dataset.item(i), per_item);
      flipped[i] = static_cast<char>(v.toxic) != baseline_toxic[i];
    });

    CompositionFlips flips;
    flips.name = named.name;
    flips.n_items = n_items;
    std::vector<Annotation> on_flipped, on_unflipped;
    for (std::size_t i = 0; i < n_items; ++i) {
      if (flipped[i]) ++flips.n_flipped;
      auto& bucket = flipped[i] ? on_flipped : on_unflipped;
      for (std::size_t k : dataset.AnnotationsOfItem(i)) bucket.push_back(dataset.annotations()[k]);
    }
    flips.flip_rate = static_cast<double>(flips.n_flipped) / static_cast<double>(n_items);
    auto stats_or_empty = [&](const std::vector<Annotation>& anns) {
      try {
        return DisagreementRate(anns, exact);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoPairs) throw;
        DisagreementStats empty;
        empty.exact = true;
        return empty;
      }
    };
    flips.flipped = stats_or_empty(on_flipped);
    flips.unflipped = stats_or_empty(on_unflipped);
    if (flips.flipped.pairs > 0 && flips.unflipped.pairs > 0) {
      flips.z = TwoProportionZ(flips.flipped.disagreeing, flips.flipped.pairs,
                               flips.unflipped.disagreeing, flips.unflipped.pairs);
    }
    flip_sum += flips.flip_rate;
    // Item ids are reused across compositions; prefix to keep pairs apart.
    for (auto a : on_flipped) {
      a.item_id = named.name + "/" + a.item_id;
      pooled_flipped.push_back(std::move(a));
    }
    for (auto a : on_unflipped) {
      a.item_id = named.name + "/" + a.item_id;
      pooled_unflipped.push_back(std::move(a));
    }
    report.compositions.push_back(std::move(flips));
  }
  if (report.compositions.empty()) return report;
  report.mean_flip_rate = flip_sum / static_cast<double>(report.compositions.size());
  auto pooled = [&](const std::vector<Annotation>& anns) {
    if (anns.empty()) return DisagreementStats{0.0, 0, 0, true};
    try {
      return DisagreementRate(anns, exact);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoPairs) throw;
      return DisagreementStats{0.0, 0, 0, true};
    }
  };
  report.flipped = pooled(pooled_flipped);
  report.unflipped = pooled(pooled_unflipped);
  if (report.flipped.pairs > 0 && report.unflipped.pairs > 0) {
    report.z = TwoProportionZ(report.flipped.disagreeing, report.flipped.pairs,
                              report.unflipped.disagreeing, report.unflipped.pairs);
  }
  return report;
}

GroupedMaeReport GroupedMae(const ReportModels& models, const Dataset& test,
                            const std::vector<std::string>& group_by, std::size_t threads) {
  for (const auto& attr : group_by) {
    if (!test.schema().HasAttribute(attr)) {
      throw Error(ErrorCode::kUnknownAttribute, "unknown group_by attribute", attr);
    }
  }
  std::vector<double> base, group_only, full;
  if (models.baseline) base = PredictAnnotations(*models.baseline, test, threads);
  if (models.group_only) group_only = PredictAnnotations(*models.group_only, test, threads);
  if (models.full) full = PredictAnnotations(*models.full, test, threads);

  auto row = [&](std::string label, const std::optional<Constraints>& filter)
      -> std::optional<GroupedMaeRow> {
    GroupedMaeRow r;
    r.group = std::move(label);
    auto fill = [&](const std::vector<double>& preds, std::optional<double>& slot) {
      if (preds.empty()) return true;
      const auto s = MaeOver(test, preds, filter);
      if (!s) return false;
      slot = s->mae;
      r.n_annotators = s->n_annotators;
      return true;
    };
    if (!fill(base, r.baseline) || !fill(group_only, r.group_only) || !fill(full, r.full)) {
      return std::nullopt;
    }
    if (base.empty() && group_only.empty() && full.empty()) {
      const auto s = MaeOver(test, std::vector<double>(test.annotations().size()), filter);
      if (!s) return std::nullopt;
      r.n_annotators = s->n_annotators;
    }
    return r;
  };

  GroupedMaeReport report;
  if (auto overall = row("overall", std::nullopt)) report.rows.push_back(std::move(*overall));
  for (const auto& attr : group_by) {
    for (const auto& value : test.schema().values.at(attr)) {
      if (auto r = row(attr + "=" + value, Constraints{{attr, value}})) {
        report.rows.push_back(std::move(*r));
      }
    }
  }
  return report;
}

std::string GroupedMaeReport::ToText() const {
  const std::vector<std::string> header{"group", "annotators", "baseline", "group_only", "full"};
  std::vector<std::vector<std::string>> cells;
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << *v;
    return os.str();
  };
  for (const auto& r : rows) {
    cells.push_back({r.group, std::to_string(r.n_annotators), num(r.baseline), num(r.group_only),
                     num(r.full)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << line[c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << line[c];
      }
    }
    os << '\n';
  };
  emit(header);
  for (const auto& line : cells) emit(line);
  return os.str();
}

}  // namespace jury
