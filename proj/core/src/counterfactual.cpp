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

#include "jury/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "jury/error.hpp"

namespace jury {

namespace {

// Exhaustive search is used while the number of lattice points stays below
// this; past it the relaxation bound pays for itself.
constexpr double kEnumerationLimit = 2e6;
constexpr std::size_t kEnumerationMaxGroups = 6;

double CompositionCount(int n, std::size_t k) {
  // C(n + k - 1, k - 1)
  double c = 1.0;
  for (std::size_t i = 1; i < k; ++i) c = c * static_cast<double>(n + i) / static_cast<double>(i);
  return c;
}

std::vector<int> Caps(const GroupScores& scores) {
  if (scores.capacity) return *scores.capacity;
  return std::vector<int>(scores.s.size(), scores.n_jurors);
}

void ValidateAllocation(const GroupScores& scores, std::span<const int> p) {
  if (p.size() != scores.s.size()) {
    throw Error(ErrorCode::kInvalidAllocation, "allocation length differs from group count",
                std::to_string(p.size()) + " vs " + std::to_string(scores.s.size()));
  }
  const auto caps = Caps(scores);
  long long sum = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < 0) throw Error(ErrorCode::kInvalidAllocation, "negative seat count");
    if (p[k] > caps[k]) {
      throw Error(ErrorCode::kInvalidAllocation, "seat count exceeds group capacity",
                  scores.groups.empty() ? std::to_string(k) : scores.groups[k]);
    }
    sum += p[k];
  }
  if (sum != scores.n_jurors) {
    throw Error(ErrorCode::kInvalidAllocation, "allocation does not sum to n_jurors",
                std::to_string(sum) + " vs " + std::to_string(scores.n_jurors));
  }
}

FlipDirection Resolve(const GroupScores& scores, std::span<const int> current,
                      const CounterfactualOptions& options) {
  if (options.direction != FlipDirection::kAuto) return options.direction;
  return JuryValue(scores, current) >= options.threshold ? FlipDirection::kDown
                                                         : FlipDirection::kUp;
}

std::vector<std::string> Edits(const GroupScores& scores, std::span<const int> from,
                               std::span<const int> to) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < from.size(); ++k) {
    const int d = to[k] - from[k];
    if (d == 0) continue;
    std::ostringstream os;
    os << (scores.groups.size() == from.size() ? scores.groups[k] : std::to_string(k)) << ": "
       << from[k] << " -> " << to[k] << " (" << (d > 0 ? "+" : "") << d << ")";
    out.push_back(os.str());
  }
  return out;
}

// Depth-first search over allocations in lexicographic order keeping the
// k best by (cost, lexicographic). With bounds enabled, subtrees whose
// relaxation bound cannot beat the current k-th cost are skipped.
class Search {
 public:
  Search(const GroupScores& scores, std::span<const int> current, FlipDirection direction,
         const CounterfactualOptions& options, std::size_t k_best, bool use_bounds)
      : scores_(scores),
        current_(current.begin(), current.end()),
        caps_(Caps(scores)),
        direction_(direction),
        options_(options),
        k_best_(k_best),
        use_bounds_(use_bounds) {
    const double sign = direction == FlipDirection::kUp ? 1.0 : -1.0;
    const double n = scores.n_jurors;
    const double margin = options.strict ? kStrictMargin : 0.0;
    for (double s : scores.s) w_.push_back(sign * s);
    // w.p >= b, relaxed slightly so rounding never cuts a feasible point.
    const double target = direction == FlipDirection::kUp ? n * (options.threshold + margin)
                                                          : -n * (options.threshold - margin);
    b_ = target - 1e-9 * std::max(1.0, std::abs(target));
    suffix_caps_.assign(caps_.size() + 1, 0);
    for (std::size_t k = caps_.size(); k-- > 0;) suffix_caps_[k] = suffix_caps_[k + 1] + caps_[k];
    p_.assign(caps_.size(), 0);
  }

  std::vector<std::pair<long long, Allocation>> Run() {
    Visit(0, scores_.n_jurors, 0.0, 0);
    return std::move(best_);
  }

 private:
  void Visit(std::size_t j, int remaining, double wp, long long cost) {
    const std::size_t K = caps_.size();
    if (remaining > suffix_caps_[j]) return;
    if (j + 1 == K) {
      p_[j] = remaining;
      const long long d = remaining - current_[j];
      Offer(cost + d * d);
      return;
    }
    if (use_bounds_ && Prune(j, remaining, wp, cost)) return;
    const int hi = std::min(caps_[j], remaining);
    for (int v = 0; v <= hi; ++v) {
      p_[j] = v;
      const long long d = v - current_[j];
      Visit(j + 1, remaining - v, wp + w_[j] * v, cost + d * d);
    }
  }

  void Offer(long long cost) {
    if (best_.size() == k_best_ && cost >= best_.back().first) return;
    if (!MeetsTarget(scores_, p_, direction_, options_)) return;
    // Leaves arrive in lexicographic order, so equal costs go after.
    auto pos = std::upper_bound(best_.begin(), best_.end(), cost,
                                [](long long c, const auto& e) { return c < e.first; });
    best_.insert(pos, {cost, p_});
    if (best_.size() > k_best_) best_.pop_back();
  }

  bool Prune(std::size_t j, int remaining, double wp, long long cost) {
    const std::size_t K = caps_.size();
    const double need = b_ - wp;
    // Largest attainable w.p over the rest: fill the largest weights first.
    std::vector<std::size_t> idx(K - j);
    std::iota(idx.begin(), idx.end(), j);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w_[a] > w_[b]; });
    double best_wp = 0.0;
    int left = remaining;
    for (std::size_t k : idx) {
      const int take = std::min(left, caps_[k]);
      best_wp += w_[k] * take;
      left -= take;
    }
    if (best_wp < need - 1e-9 * std::max(1.0, std::abs(need))) return true;
    if (best_.size() < k_best_) return false;
    const double lb = static_cast<double>(cost) + RelaxationBound(j, remaining, need);
    return std::ceil(lb - 1e-6) >= static_cast<double>(best_.back().first);
  }

  // Projection of y onto {x : sum x = r, 0 <= x <= u} over groups [j, K).
  void Project(std::size_t j, int r, const std::vector<double>& y, std::vector<double>& x) const {
    const std::size_t K = caps_.size();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = j; k < K; ++k) {
      lo = std::min(lo, y[k] - caps_[k]);
      hi = std::max(hi, y[k]);
    }
    lo -= 1.0;
    hi += 1.0;
    for (int it = 0; it < 100; ++it) {
      const double theta = 0.5 * (lo + hi);
      double sum = 0.0;
      for (std::size_t k = j; k < K; ++k) sum += std::clamp(y[k] - theta, 0.0, double(caps_[k]));
      if (sum > r) lo = theta; else hi = theta;
    }
    const double theta = 0.5 * (lo + hi);
    for (std::size_t k = j; k < K; ++k) x[k] = std::clamp(y[k] - theta, 0.0, double(caps_[k]));
  }

  // max over lambda >= 0 of the Lagrangian dual of
  //   min sum (x - c)^2  s.t.  w.x >= need, x in the capped simplex.
  // Any lambda gives a valid bound; the search only tightens it.
  double RelaxationBound(std::size_t j, int r, double need) {
    const std::size_t K = caps_.size();
    std::vector<double> y(K), x(K);
    auto dual = [&](double lambda, double* slack) {
      for (std::size_t k = j; k < K; ++k) y[k] = current_[k] + 0.5 * lambda * w_[k];
      Project(j, r, y, x);
      double obj = 0.0, wx = 0.0;
      for (std::size_t k = j; k < K; ++k) {
        obj += (x[k] - current_[k]) * (x[k] - current_[k]);
        wx += w_[k] * x[k];
      }
      if (slack) *slack = wx - need;
      return obj - lambda * (wx - need);
    };
    double slack = 0.0;
    const double q0 = dual(0.0, &slack);
    if (slack >= 0.0) return q0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      dual(hi, &slack);
      if (slack >= 0.0) break;
      hi *= 2.0;
    }
    double a = 0.0, b = hi;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = dual(c, nullptr), fd = dual(d, nullptr);
    double best = std::max({q0, fc, fd});
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = dual(d, nullptr);
      } else {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = dual(c, nullptr);
      }
      best = std::max({best, fc, fd});
    }
    return best;
  }

  const GroupScores& scores_;
  Allocation current_;
  std::vector<int> caps_;
  FlipDirection direction_;
  CounterfactualOptions options_;
  std::size_t k_best_;
  bool use_bounds_;
  std::vector<double> w_;
  double b_ = 0.0;
  std::vector<int> suffix_caps_;
  Allocation p_;
  std::vector<std::pair<long long, Allocation>> best_;
};

}  // namespace

void GroupScores::Validate() const {
  if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one group is required");
  if (!groups.empty() && groups.size() != s.size()) {
    throw Error(ErrorCode::kInvalidArgument, "group labels and scores differ in length");
  }
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "group score is not finite");
  }
  if (n_jurors < 1) throw Error(ErrorCode::kInvalidArgument, "n_jurors must be at least 1");
  if (capacity) {
    if (capacity->size() != s.size()) {
      throw Error(ErrorCode::kInvalidArgument, "capacity length differs from group count");
    }
    for (int c : *capacity) {
      if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative group capacity");
    }
  }
}

double JuryValue(const GroupScores& scores, std::span<const int> allocation) {
  double sum = 0.0;
  for (std::size_t k = 0; k < allocation.size(); ++k) sum += allocation[k] * scores.s[k];
  return sum / static_cast<double>(scores.n_jurors);
}

bool MeetsTarget(const GroupScores& scores, std::span<const int> allocation,
                 FlipDirection direction, const CounterfactualOptions& options) {
  const double v = JuryValue(scores, allocation);
  const double margin = options.strict ? kStrictMargin : 0.0;
  if (direction == FlipDirection::kDown) return v <= options.threshold - margin;
  return v >= options.threshold + margin;
}

std::vector<CounterfactualResult> SolveCounterfactuals(const GroupScores& scores,
                                                       std::span<const int> current,
                                                       const CounterfactualOptions& options,
                                                       std::size_t k_best) {
  scores.Validate();
  ValidateAllocation(scores, current);
  if (k_best == 0) return {};
  const FlipDirection direction = Resolve(scores, current, options);
  const bool enumerate = scores.s.size() <= kEnumerationMaxGroups &&
                         CompositionCount(scores.n_jurors, scores.s.size()) <= kEnumerationLimit;
  Search search(scores, current, direction, options, k_best, !enumerate);
  std::vector<CounterfactualResult> out;
  const double v_before = JuryValue(scores, current);
  for (auto& [cost, p] : search.Run()) {
    CounterfactualResult r;
    r.cost = cost;
    r.v_before = v_before;
    r.v_after = JuryValue(scores, p);
    r.direction = direction;
    r.edits = Edits(scores, current, p);
    r.p_star = std::move(p);
    out.push_back(std::move(r));
  }
  return out;
}

CounterfactualResult FindCounterfactual(const GroupScores& scores, std::span<const int> current,
                                        const CounterfactualOptions& options) {
  auto results = SolveCounterfactuals(scores, current, options, 1);
  if (results.empty()) {
    const FlipDirection direction = Resolve(scores, current, options);
    std::ostringstream os;
    os << "no allocation of " << scores.n_jurors << " seats moves the jury value "
       << (direction == FlipDirection::kUp ? "above " : "below ") << options.threshold;
    throw Error(ErrorCode::kInfeasible, os.str());
  }
  return std::move(results.front());
}

GroupScores SheetScores(const JuryModel& model, const Dataset& dataset,
                        const JuryComposition& composition, const Item& item,
                        bool respect_capacity, std::size_t threads) {
  const JurorSampler sampler(dataset, composition);
  GroupScores scores;
  scores.n_jurors = composition.n_jurors;
  std::vector<int> caps;
  for (std::size_t k = 0; k < composition.sheets.size(); ++k) {
    const auto& pool = sampler.pools()[k];
    const auto preds = PredictAnnotators(model, dataset, item, pool, threads);
    scores.groups.push_back(composition.sheets[k].sheet_id);
    scores.s.push_back(std::accumulate(preds.begin(), preds.end(), 0.0) /
                       static_cast<double>(preds.size()));
    caps.push_back(static_cast<int>(pool.size()));
  }
  if (respect_capacity) scores.capacity = std::move(caps);
  return scores;
}

CounterfactualTable ComputeCounterfactualTable(const JuryModel& model, const Dataset& dataset,
                                               const JuryComposition& composition,
                                               const Item& item, std::size_t k_best,
                                               const CounterfactualTableOptions& options) {
  if (k_best == 0) throw Error(ErrorCode::kInvalidArgument, "k_best must be at least 1");
  CounterfactualTable table;
  table.scores = SheetScores(model, dataset, composition, item, options.respect_capacity,
                             options.threads);
  for (const auto& sheet : composition.sheets) table.current.push_back(sheet.seats);
  auto results = SolveCounterfactuals(table.scores, table.current, options.solver, k_best);
  if (results.empty()) {
    try {
      FindCounterfactual(table.scores, table.current, options.solver);
    } catch (const Error& e) {
      table.infeasible_reason = e.what();
    }
    return table;
  }
  for (auto& r : results) {
    CounterfactualRow row;
    row.composition.n_jurors = composition.n_jurors;
    for (std::size_t k = 0; k < composition.sheets.size(); ++k) {
      if (r.p_star[k] == 0) continue;
      JurorSheet sheet = composition.sheets[k];
      sheet.seats = r.p_star[k];
      row.composition.sheets.push_back(std::move(sheet));
    }
    row.result = std::move(r);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace jury
