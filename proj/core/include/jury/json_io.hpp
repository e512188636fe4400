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

// JSON shapes shared by the CLI and the service.
//
// A juror sheet is an object with a "jurors" seat count, an optional
// "sheet_id", and one key per constrained attribute:
//
//   {"jurors": 4, "gender_identity": "female"}
//
// A composition is either a bare array of sheets (n_jurors = total seats) or
// {"n_jurors": 12, "sheets": [...]}. Parse failures throw Error with
// kInvalidArgument and name the offending field.

#ifndef JURY_JSON_IO_HPP_
#define JURY_JSON_IO_HPP_

#include "jury/conditional.hpp"
#include "jury/config_json.hpp"
#include "jury/counterfactual.hpp"
#include "jury/eval.hpp"
#include "jury/jury.hpp"

namespace jury {

JurorSheet ParseSheet(const Json& j, std::size_t index);
JuryComposition ParseComposition(const Json& j);
Json CompositionToJson(const JuryComposition& composition);

// Overlays fields present in `j` onto `base`.
VerdictConfig ParseVerdictConfig(const Json& j, VerdictConfig base = {});

// Verdict in the {"verdict", "votes", "jurors", "population"} shape, plus
// "trial_means", "score", "interval", "median_trial", "threshold", "seed".
// Juror entries carry the annotator's attributes inline.
Json VerdictToJson(const Verdict& verdict, const Dataset& dataset);

Json TrendsToJson(const JuryTrends& trends);
Json JurorDetailsToJson(const JurorDetails& details);

GroupScores ParseGroupScores(const Json& j);
Json CounterfactualToJson(const CounterfactualResult& result, double threshold);
Json CounterfactualTableToJson(const CounterfactualTable& table, double threshold);

// {"n_jurors", "default": [sheets], "rules": [{"name", "priority",
//  "when": {"keyword_contains": term} | {"embedding_within": {"probe",
//  "max_distance"}}, "patch": [sheets]}], "remainder_sheet_id"?}
ConditionalJuryPolicy ParsePolicy(const Json& j);
Json PolicyToJson(const ConditionalJuryPolicy& policy);
Json TraceToJson(const ResolutionTrace& trace);

// {"attributes": {name: {value: annotator count}}}; attributes without any
// values are omitted.
Json SchemaToJson(const Dataset& dataset);

Json MaeReportToJson(const GroupedMaeReport& report);
Json FlipReportToJson(const FlipReport& report);
Json DisagreementToJson(const DisagreementStats& stats);

}  // namespace jury

#endif  // JURY_JSON_IO_HPP_
