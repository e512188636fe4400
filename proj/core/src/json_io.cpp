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

#include "jury/error.hpp"

namespace jury {

namespace {

[[noreturn]] void Bad(const std::string& what, const std::string& detail = {}) {
  throw Error(ErrorCode::kInvalidArgument, what, detail);
}

const Json& Field(const Json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) Bad(context + " is missing '" + key + "'");
  return *it;
}

long long Integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) Bad(what + " must be an integer");
  return j.get<long long>();
}

double Number(const Json& j, const std::string& what) {
  if (!j.is_number()) Bad(what + " must be a number");
  return j.get<double>();
}

std::string String(const Json& j, const std::string& what) {
  if (!j.is_string()) Bad(what + " must be a string");
  return j.get<std::string>();
}

std::string Side(bool toxic) { return toxic ? "toxic" : "nontoxic"; }

std::string DirectionName(FlipDirection d) {
  switch (d) {
    case FlipDirection::kUp: return "up";
    case FlipDirection::kDown: return "down";
    case FlipDirection::kAuto: break;
  }
  return "auto";
}

Json SheetToJson(const JurorSheet& sheet) {
  Json j = Json::object();
  for (const auto& [name, value] : sheet.constraints) j[name] = value;
  j["sheet_id"] = sheet.sheet_id;
  j["jurors"] = sheet.seats;
  return j;
}

std::vector<JurorSheet> ParseSheets(const Json& j, const std::string& context) {
  if (!j.is_array()) Bad(context + " must be an array of juror sheets");
  std::vector<JurorSheet> sheets;
  for (std::size_t i = 0; i < j.size(); ++i) sheets.push_back(ParseSheet(j[i], i));
  return sheets;
}

Json SheetsToJson(const std::vector<JurorSheet>& sheets) {
  Json a = Json::array();
  for (const auto& s : sheets) a.push_back(SheetToJson(s));
  return a;
}

}  // namespace

JurorSheet ParseSheet(const Json& j, std::size_t index) {
  const std::string context = "sheet " + std::to_string(index);
  if (!j.is_object()) Bad(context + " must be an object");
  JurorSheet sheet;
  for (const auto& [key, value] : j.items()) {
    if (key == "jurors" || key == "seats") {
      const long long seats = Integer(value, context + " '" + key + "'");
      if (seats < 1 || seats > 1000000) {
        throw Error(ErrorCode::kInvalidComposition, "sheet seats must be at least 1", context);
      }
      sheet.seats = static_cast<int>(seats);
    } else if (key == "sheet_id") {
      sheet.sheet_id = String(value, context + " 'sheet_id'");
    } else if (key == "constraints") {
      if (!value.is_object()) Bad(context + " 'constraints' must be an object");
      for (const auto& [name, v] : value.items()) {
        sheet.constraints[name] = String(v, context + " constraint '" + name + "'");
      }
    } else {
      sheet.constraints[key] = String(value, context + " constraint '" + key + "'");
    }
  }
  if (j.find("jurors") == j.end() && j.find("seats") == j.end()) {
    Bad(context + " is missing 'jurors'");
  }
  return sheet;
}

JuryComposition ParseComposition(const Json& j) {
  if (j.is_array()) return JuryComposition::FromSheets(ParseSheets(j, "composition"));
  if (!j.is_object()) Bad("composition must be an array or an object");
  RejectUnknownKeys(j, {"sheets", "n_jurors"}, "composition");
  JuryComposition c = JuryComposition::FromSheets(ParseSheets(Field(j, "sheets", "composition"), "composition 'sheets'"));
  if (auto it = j.find("n_jurors"); it != j.end()) {
    const long long n = Integer(*it, "composition 'n_jurors'");
    if (n < 1 || n > 1000000) {
      throw Error(ErrorCode::kInvalidComposition, "n_jurors must be at least 1");
    }
    c.n_jurors = static_cast<int>(n);
  }
  return c;
}

Json CompositionToJson(const JuryComposition& composition) {
  return Json{{"n_jurors", composition.n_jurors}, {"sheets", SheetsToJson(composition.sheets)}};
}

VerdictConfig ParseVerdictConfig(const Json& j, VerdictConfig base) {
  if (j.is_null()) return base;
  RejectUnknownKeys(j, {"n_trials", "seed", "threshold", "lower_quantile", "upper_quantile"},
                    "verdict_config");
  if (auto it = j.find("n_trials"); it != j.end()) {
    const long long n = Integer(*it, "'n_trials'");
    if (n < 1) Bad("n_trials must be at least 1");
    base.n_trials = static_cast<std::size_t>(n);
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      Bad("'seed' must be a non-negative integer");
    }
    base.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("threshold"); it != j.end()) base.threshold = Number(*it, "'threshold'");
  if (auto it = j.find("lower_quantile"); it != j.end()) {
    base.lower_quantile = Number(*it, "'lower_quantile'");
  }
  if (auto it = j.find("upper_quantile"); it != j.end()) {
    base.upper_quantile = Number(*it, "'upper_quantile'");
  }
  base.Validate();
  return base;
}

Json VerdictToJson(const Verdict& verdict, const Dataset& dataset) {
  Json jurors = Json::array();
  for (const auto& seat : verdict.median_jury.seats) {
    Json juror = Json::object();
    for (const auto& [name, value] : dataset.annotator(seat.annotator_index).attributes) {
      juror[name] = value;
    }
    juror["juror_id"] = seat.annotator_id;
    juror["sheet_id"] = seat.sheet_id;
    juror["predicted"] = seat.predicted;
    juror["vote"] = Side(seat.predicted >= verdict.threshold);
    jurors.push_back(std::move(juror));
  }
  return Json{
      {"verdict", Side(verdict.toxic)},
      {"votes", {{"toxic", verdict.VoteFraction(true)}, {"nontoxic", verdict.VoteFraction(false)}}},
      {"jurors", std::move(jurors)},
      {"population", {{"toxic", verdict.toxic_fraction}, {"nontoxic", verdict.nontoxic_fraction}}},
      {"trial_means", verdict.trial_means},
      {"score", verdict.score},
      {"interval", {verdict.interval_low, verdict.interval_high}},
      {"median_trial", verdict.median_trial},
      {"n_trials", verdict.trial_means.size()},
      {"threshold", verdict.threshold},
      {"seed", verdict.seed},
  };
}

Json TrendsToJson(const JuryTrends& trends) {
  Json groups = Json::array();
  for (const auto& g : trends.groups) {
    groups.push_back({{"key", g.key},
                      {"juror_ids", g.juror_ids},
                      {"juror_predictions", g.juror_predictions},
                      {"juror_bins", g.juror_bins},
                      {"mean_predicted", g.mean_predicted},
                      {"population_size", g.population_size},
                      {"population_histogram", g.population_histogram}});
  }
  return Json{{"group_by", trends.group_by}, {"bin_edges", trends.bin_edges}, {"groups", groups}};
}

Json JurorDetailsToJson(const JurorDetails& details) {
  Json anns = Json::array();
  for (const auto& a : details.annotations) {
    anns.push_back({{"item_id", a.item_id},
                    {"text", a.text},
                    {"observed", a.observed},
                    {"predicted", a.predicted}});
  }
  return Json{{"annotator_id", details.profile.annotator_id},
              {"attributes", details.profile.attributes},
              {"annotations", std::move(anns)},
              {"mae", details.mae ? Json(*details.mae) : Json(nullptr)}};
}

GroupScores ParseGroupScores(const Json& j) {
  RejectUnknownKeys(j, {"groups", "s", "n_jurors", "capacity"}, "group scores");
  GroupScores g;
  const Json& s = Field(j, "s", "group scores");
  if (!s.is_array()) Bad("'s' must be an array");
  for (const auto& v : s) g.s.push_back(Number(v, "score"));
  if (auto it = j.find("groups"); it != j.end()) {
    if (!it->is_array()) Bad("'groups' must be an array");
    for (const auto& v : *it) g.groups.push_back(String(v, "group label"));
  }
  if (auto it = j.find("n_jurors"); it != j.end()) {
    g.n_jurors = static_cast<int>(Integer(*it, "'n_jurors'"));
  }
  if (auto it = j.find("capacity"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) Bad("'capacity' must be an array");
    std::vector<int> caps;
    for (const auto& v : *it) caps.push_back(static_cast<int>(Integer(v, "capacity")));
    g.capacity = std::move(caps);
  }
  g.Validate();
  return g;
}

Json CounterfactualToJson(const CounterfactualResult& r, double threshold) {
  return Json{{"p_star", r.p_star},
              {"cost", r.cost},
              {"v_before", r.v_before},
              {"v_after", r.v_after},
              {"direction", DirectionName(r.direction)},
              {"verdict_after", Side(r.v_after >= threshold)},
              {"edits", r.edits}};
}

Json CounterfactualTableToJson(const CounterfactualTable& table, double threshold) {
  Json groups = Json::array();
  for (std::size_t k = 0; k < table.scores.s.size(); ++k) {
    Json g{{"sheet_id", table.scores.groups[k]},
           {"score", table.scores.s[k]},
           {"seats", table.current[k]}};
    if (table.scores.capacity) g["capacity"] = (*table.scores.capacity)[k];
    groups.push_back(std::move(g));
  }
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r = CounterfactualToJson(row.result, threshold);
    r["composition"] = CompositionToJson(row.composition);
    rows.push_back(std::move(r));
  }
  Json out{{"groups", std::move(groups)},
           {"current", table.current},
           {"v_before", JuryValue(table.scores, table.current)},
           {"rows", std::move(rows)}};
  out["infeasible_reason"] = table.infeasible_reason ? Json(*table.infeasible_reason) : Json(nullptr);
  return out;
}

ConditionalJuryPolicy ParsePolicy(const Json& j) {
  if (!j.is_object()) Bad("policy must be an object");
  RejectUnknownKeys(j, {"n_jurors", "default", "rules", "remainder_sheet_id"}, "policy");
  ConditionalJuryPolicy p;
  if (auto it = j.find("n_jurors"); it != j.end()) p.n_jurors = static_cast<int>(Integer(*it, "'n_jurors'"));
  if (auto it = j.find("default"); it != j.end()) p.default_sheets = ParseSheets(*it, "policy 'default'");
  if (auto it = j.find("remainder_sheet_id"); it != j.end()) {
    p.remainder_sheet_id = String(*it, "'remainder_sheet_id'");
  }
  if (auto it = j.find("rules"); it != j.end()) {
    if (!it->is_array()) Bad("policy 'rules' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& r = (*it)[i];
      const std::string context = "rule " + std::to_string(i);
      RejectUnknownKeys(r, {"name", "priority", "when", "patch"}, context.c_str());
      ConditionRule rule;
      rule.name = r.contains("name") ? String(r["name"], context + " 'name'") : "rule" + std::to_string(i);
      if (r.contains("priority")) rule.priority = static_cast<int>(Integer(r["priority"], context + " 'priority'"));
      const Json& when = Field(r, "when", context);
      if (!when.is_object() || when.size() != 1) Bad(context + " 'when' must hold one predicate");
      if (auto kw = when.find("keyword_contains"); kw != when.end()) {
        rule.predicate = {PredicateKind::kKeywordContains, String(*kw, context + " keyword"), 0.0};
      } else if (auto em = when.find("embedding_within"); em != when.end()) {
        RejectUnknownKeys(*em, {"probe", "max_distance"}, (context + " embedding_within").c_str());
        rule.predicate = {PredicateKind::kEmbeddingWithin, String(Field(*em, "probe", context), context + " probe"),
                          Number(Field(*em, "max_distance", context), context + " max_distance")};
      } else {
        Bad(context + " has an unknown predicate", when.begin().key());
      }
      rule.patch = ParseSheets(Field(r, "patch", context), context + " 'patch'");
      p.rules.push_back(std::move(rule));
    }
  }
  p.Validate();
  return p;
}

Json PolicyToJson(const ConditionalJuryPolicy& policy) {
  Json rules = Json::array();
  for (const auto& r : policy.rules) {
    Json when;
    if (r.predicate.kind == PredicateKind::kKeywordContains) {
      when = {{"keyword_contains", r.predicate.term}};
    } else {
      when = {{"embedding_within",
               {{"probe", r.predicate.term}, {"max_distance", r.predicate.max_distance}}}};
    }
    rules.push_back({{"name", r.name},
                     {"priority", r.priority},
                     {"when", std::move(when)},
                     {"patch", SheetsToJson(r.patch)}});
  }
  return Json{{"n_jurors", policy.n_jurors},
              {"default", SheetsToJson(policy.default_sheets)},
              {"rules", std::move(rules)},
              {"remainder_sheet_id", policy.remainder_sheet_id}};
}

Json TraceToJson(const ResolutionTrace& trace) {
  Json evaluated = Json::array();
  for (const auto& t : trace.evaluated) {
    Json e{{"rule_index", t.rule_index}, {"name", t.name}, {"matched", t.matched}};
    e["distance"] = t.distance ? Json(*t.distance) : Json(nullptr);
    if (t.error) e["error"] = *t.error;
    evaluated.push_back(std::move(e));
  }
  return Json{{"evaluated", std::move(evaluated)},
              {"fired", trace.fired ? Json(*trace.fired) : Json(nullptr)}};
}

Json SchemaToJson(const Dataset& dataset) {
  Json attributes = Json::object();
  const auto& schema = dataset.schema();
  for (const auto& name : schema.names) {
    const auto& values = schema.values.at(name);
    if (values.empty()) continue;
    Json counts = Json::object();
    for (const auto& v : values) counts[v] = 0;
    for (const auto& a : dataset.annotators()) {
      auto it = a.attributes.find(name);
      if (it != a.attributes.end()) counts[it->second] = counts[it->second].get<int>() + 1;
    }
    attributes[name] = std::move(counts);
  }
  return Json{{"attributes", std::move(attributes)},
              {"n_annotators", dataset.annotators().size()},
              {"n_items", dataset.items().size()}};
}

Json MaeReportToJson(const GroupedMaeReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"group", r.group},
                    {"n_annotators", r.n_annotators},
                    {"baseline", opt(r.baseline)},
                    {"group_only", opt(r.group_only)},
                    {"full", opt(r.full)}});
  }
  return Json{{"rows", std::move(rows)}};
}

Json DisagreementToJson(const DisagreementStats& s) {
  return Json{{"rate", s.rate}, {"disagreeing", s.disagreeing}, {"pairs", s.pairs}, {"exact", s.exact}};
}

Json FlipReportToJson(const FlipReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json comps = Json::array();
  for (const auto& c : report.compositions) {
    comps.push_back({{"name", c.name},
                     {"n_items", c.n_items},
                     {"n_flipped", c.n_flipped},
                     {"flip_rate", c.flip_rate},
                     {"flipped", DisagreementToJson(c.flipped)},
                     {"unflipped", DisagreementToJson(c.unflipped)},
                     {"z", opt(c.z)}});
  }
  Json dropped = Json::array();
  for (const auto& d : report.dropped) dropped.push_back({{"name", d.name}, {"reason", d.reason}});
  return Json{{"compositions", std::move(comps)},
              {"dropped", std::move(dropped)},
              {"mean_flip_rate", report.mean_flip_rate},
              {"flipped", DisagreementToJson(report.flipped)},
              {"unflipped", DisagreementToJson(report.unflipped)},
              {"z", opt(report.z)}};
}

}  // namespace jury
