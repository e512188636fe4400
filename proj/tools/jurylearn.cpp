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

// jurylearn: synth | train | verdict | counterfactual | conditional | juror |
// evaluate | serve.
//
// Exit codes: 0 success, 1 any other error, 2 infeasible composition,
// 3 unknown attribute or value. train and synth always exit 1 on error.

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jury/conditional.hpp"
#include "jury/config_json.hpp"
#include "jury/counterfactual.hpp"
#include "jury/dataset.hpp"
#include "jury/error.hpp"
#include "jury/eval.hpp"
#include "jury/json_io.hpp"
#include "jury/jury.hpp"
#include "jury/model.hpp"
#include "jury/service.hpp"
#include "jury/synthetic.hpp"
#include "jury/trainer.hpp"

namespace fs = std::filesystem;

namespace {

using jury::Json;

int ExitCodeFor(jury::ErrorCode code) {
  using jury::ErrorCode;
  switch (code) {
    case ErrorCode::kInsufficientAnnotators:
    case ErrorCode::kInvalidComposition:
    case ErrorCode::kInfeasible:
      return 2;
    case ErrorCode::kUnknownAttribute:
    case ErrorCode::kUnknownValue:
      return 3;
    default:
      return 1;
  }
}

struct DataFlags {
  std::string dir;
  std::string items, annotators, annotations;

  void Add(CLI::App* app) {
    app->add_option("--data", dir, "Directory with items/annotators/annotations .jsonl");
    app->add_option("--items", items, "Items file (overrides --data)");
    app->add_option("--annotators", annotators, "Annotators file (overrides --data)");
    app->add_option("--annotations", annotations, "Annotations .jsonl or .csv (overrides --data)");
  }

  jury::DatasetPaths Paths() const {
    jury::DatasetPaths p;
    if (!dir.empty()) p = jury::DatasetPaths::InDirectory(dir);
    if (!items.empty()) p.items = items;
    if (!annotators.empty()) p.annotators = annotators;
    if (!annotations.empty()) p.annotations = annotations;
    if (p.items.empty() || p.annotators.empty() || p.annotations.empty()) {
      throw jury::Error(jury::ErrorCode::kInvalidArgument,
                        "dataset location missing: pass --data or all of --items, "
                        "--annotators and --annotations");
    }
    return p;
  }

  jury::Dataset Load() const { return jury::LoadDataset(Paths()); }
};

struct ItemFlags {
  std::string text;
  std::string item_id;

  void Add(CLI::App* app) {
    app->add_option("--text", text, "Item text to classify");
    app->add_option("--item-id", item_id, "Dataset item to classify");
  }

  jury::Item Resolve(const jury::Dataset& dataset) const {
    if (text.empty() == item_id.empty()) {
      throw jury::Error(jury::ErrorCode::kInvalidArgument, "give exactly one of --text or --item-id");
    }
    if (!text.empty()) return jury::Item{"", text, std::nullopt};
    const auto index = dataset.FindItem(item_id);
    if (!index) throw jury::Error(jury::ErrorCode::kInvalidArgument, "unknown item id", item_id);
    return dataset.item(*index);
  }
};

struct Globals {
  bool json = false;
  std::size_t threads = 1;
};

void PrintJson(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::string Fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---- synth -----------------------------------------------------------------

void RunSynth(const std::string& spec_path, const std::string& out, const Globals& g) {
  const auto spec = jury::ReadJsonFile(spec_path).get<jury::SyntheticSpec>();
  auto [dataset, oracle] = jury::GenerateSynthetic(spec);
  jury::SaveDataset(dataset, jury::DatasetPaths::InDirectory(out));
  const Json summary{{"out", out},
                     {"items", dataset.items().size()},
                     {"annotators", dataset.annotators().size()},
                     {"annotations", dataset.annotations().size()}};
  if (g.json) {
    PrintJson(summary);
  } else {
    std::cout << "wrote " << dataset.items().size() << " items, " << dataset.annotators().size()
              << " annotators, " << dataset.annotations().size() << " annotations to " << out
              << '\n';
  }
}

// ---- train -----------------------------------------------------------------

struct TrainFlags {
  DataFlags data;
  std::string config;
  std::string out;
  std::string report;
  std::string ablation = "full";
  double test_fraction = 0.0;
  std::uint64_t split_seed = 0;
};

void RunTrain(const TrainFlags& f, const Globals& g) {
  jury::ModelConfig model_config;
  jury::TrainConfig train_config;
  if (!f.config.empty()) {
    const Json cfg = jury::ReadJsonFile(f.config);
    jury::RejectUnknownKeys(cfg, {"model", "train"}, "training config");
    if (cfg.contains("model")) model_config = cfg["model"].get<jury::ModelConfig>();
    if (cfg.contains("train")) train_config = cfg["train"].get<jury::TrainConfig>();
  }
  const jury::ModelKind kind = jury::ParseModelKind(f.ablation);
  jury::Dataset dataset = f.data.Load();
  std::optional<jury::Dataset> test;
  if (f.test_fraction > 0.0) {
    auto [train, held_out] = jury::SplitByItem(dataset, f.test_fraction, f.split_seed);
    dataset = std::move(train);
    test = std::move(held_out);
  }
  auto on_epoch = [&](std::size_t epoch, double loss) {
    std::cerr << "epoch " << epoch + 1 << " loss " << Fixed(loss, 5) << '\n';
  };
  const jury::JuryModel model = jury::TrainKind(kind, dataset, model_config, train_config, on_epoch);
  jury::SaveCheckpoint(model, f.out);

  Json report{{"checkpoint", f.out},
              {"kind", jury::ModelKindName(model.kind())},
              {"metadata", model.metadata()},
              {"train_annotations", dataset.annotations().size()}};
  if (test && !test->empty()) {
    report["test_mae"] = jury::PerAnnotatorMae(model, *test, std::nullopt, g.threads).mae;
    report["test_annotations"] = test->annotations().size();
  }
  const std::string report_path = f.report.empty() ? f.out + ".report.json" : f.report;
  jury::WriteJsonFile(report_path, report);
  if (g.json) {
    PrintJson(report);
  } else {
    std::cout << "trained " << jury::ModelKindName(model.kind()) << " model: "
              << model.metadata().epochs_run << " epochs, final loss "
              << (model.metadata().epoch_losses.empty()
                      ? std::string("n/a")
                      : Fixed(model.metadata().epoch_losses.back(), 5))
              << "\ncheckpoint " << f.out << "\nreport " << report_path << '\n';
    if (report.contains("test_mae")) {
      std::cout << "held-out MAE " << Fixed(report["test_mae"].get<double>(), 4) << '\n';
    }
  }
}

// ---- verdict ---------------------------------------------------------------

struct VerdictFlags {
  std::string checkpoint;
  DataFlags data;
  std::string composition;
  ItemFlags item;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double threshold = jury::kToxicityThreshold;
  bool table = false;
};

void PrintVerdictTable(const jury::Verdict& v) {
  std::cout << "verdict   " << (v.toxic ? "toxic" : "nontoxic") << '\n'
            << "score     " << Fixed(v.score, 2) << " / 4.00\n"
            << "interval  " << Fixed(v.interval_low, 2) << " - " << Fixed(v.interval_high, 2)
            << '\n'
            << "votes     " << Fixed(v.VoteFraction(true), 2) << " toxic, "
            << Fixed(v.VoteFraction(false), 2) << " nontoxic (median jury, trial "
            << v.median_trial << ")\n"
            << "juries    " << Fixed(v.toxic_fraction, 2) << " toxic, "
            << Fixed(v.nontoxic_fraction, 2) << " nontoxic over " << v.trial_means.size()
            << " trials\n\n";
  std::size_t id_width = 8, sheet_width = 5;
  for (const auto& s : v.median_jury.seats) {
    id_width = std::max(id_width, s.annotator_id.size());
    sheet_width = std::max(sheet_width, s.sheet_id.size());
  }
  std::cout << std::left << std::setw(static_cast<int>(sheet_width)) << "sheet" << "  "
            << std::setw(static_cast<int>(id_width)) << "juror_id" << "  predicted  vote\n";
  for (const auto& s : v.median_jury.seats) {
    std::cout << std::left << std::setw(static_cast<int>(sheet_width)) << s.sheet_id << "  "
              << std::setw(static_cast<int>(id_width)) << s.annotator_id << "  " << std::right
              << std::setw(9) << Fixed(s.predicted, 3) << "  "
              << (s.predicted >= v.threshold ? "toxic" : "nontoxic") << '\n';
  }
}

void RunVerdict(const VerdictFlags& f, const Globals& g) {
  const jury::Dataset dataset = f.data.Load();
  const jury::JuryModel model = jury::LoadCheckpoint(f.checkpoint);
  const jury::JuryComposition composition = jury::ParseComposition(jury::ReadJsonFile(f.composition));
  const jury::Item item = f.item.Resolve(dataset);
  jury::VerdictConfig vc;
  vc.n_trials = f.trials;
  vc.seed = f.seed;
  vc.threshold = f.threshold;
  vc.threads = g.threads;
  const jury::Verdict verdict = jury::JuryVerdict(model, dataset, composition, item, vc);
  if (g.json || !f.table) {
    PrintJson(jury::VerdictToJson(verdict, dataset));
  } else {
    PrintVerdictTable(verdict);
  }
}

// ---- counterfactual --------------------------------------------------------

struct CounterfactualFlags {
  std::string checkpoint;
  DataFlags data;
  std::string composition;
  ItemFlags item;
  std::size_t k_best = 5;
  bool non_strict = false;
  double threshold = jury::kToxicityThreshold;
};

int RunCounterfactual(const CounterfactualFlags& f, const Globals& g) {
  const jury::Dataset dataset = f.data.Load();
  const jury::JuryModel model = jury::LoadCheckpoint(f.checkpoint);
  const jury::JuryComposition composition = jury::ParseComposition(jury::ReadJsonFile(f.composition));
  const jury::Item item = f.item.Resolve(dataset);
  jury::CounterfactualTableOptions options;
  options.solver.strict = !f.non_strict;
  options.solver.threshold = f.threshold;
  options.threads = g.threads;
  const auto table = jury::ComputeCounterfactualTable(model, dataset, composition, item, f.k_best, options);
  if (g.json) {
    PrintJson(jury::CounterfactualTableToJson(table, f.threshold));
  } else {
    std::cout << "current value " << Fixed(jury::JuryValue(table.scores, table.current), 3) << '\n';
    for (std::size_t k = 0; k < table.scores.s.size(); ++k) {
      std::cout << "  " << table.scores.groups[k] << ": " << table.current[k] << " seats, s = "
                << Fixed(table.scores.s[k], 3) << '\n';
    }
    if (table.infeasible_reason) std::cout << "infeasible: " << *table.infeasible_reason << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& res = table.rows[r].result;
      std::cout << r + 1 << ". cost " << res.cost << ", value " << Fixed(res.v_after, 3) << ":";
      for (const auto& e : res.edits) std::cout << "  " << e;
      std::cout << '\n';
    }
  }
  return table.infeasible_reason ? 2 : 0;
}

// ---- conditional -----------------------------------------------------------

void RunConditional(const std::string& checkpoint, const std::string& policy_path,
                    const std::string& text, const Globals& g) {
  const jury::ConditionalJuryPolicy policy = jury::ParsePolicy(jury::ReadJsonFile(policy_path));
  std::optional<jury::JuryModel> model;
  if (!checkpoint.empty()) model = jury::LoadCheckpoint(checkpoint);
  const jury::ContentEncoder* encoder =
      model && model->encoder().has_parameters() ? &model->encoder() : nullptr;
  const jury::Item item{"", text, std::nullopt};
  const auto composition = jury::ResolveComposition(policy, item, encoder);
  const auto trace = jury::ExplainResolution(policy, item, encoder);
  if (g.json) {
    PrintJson(Json{{"composition", jury::CompositionToJson(composition)},
                   {"trace", jury::TraceToJson(trace)}});
    return;
  }
  for (const auto& t : trace.evaluated) {
    std::cout << (t.matched ? "[x] " : "[ ] ") << t.name;
    if (t.distance) std::cout << " distance " << Fixed(*t.distance, 4);
    if (t.error) std::cout << " (" << *t.error << ")";
    std::cout << '\n';
  }
  for (const auto& s : composition.sheets) {
    std::cout << s.sheet_id << ": " << s.seats << " seats";
    for (const auto& [k, v] : s.constraints) std::cout << ' ' << k << '=' << v;
    std::cout << '\n';
  }
}

// ---- juror -----------------------------------------------------------------

void RunJuror(const std::string& checkpoint, const DataFlags& data, const std::string& id,
              const Globals& g) {
  const jury::Dataset dataset = data.Load();
  const jury::JuryModel model = jury::LoadCheckpoint(checkpoint);
  const auto details = jury::GetJurorDetails(model, dataset, id);
  if (g.json) {
    PrintJson(jury::JurorDetailsToJson(details));
    return;
  }
  std::cout << details.profile.annotator_id << '\n';
  for (const auto& [k, v] : details.profile.attributes) std::cout << "  " << k << ": " << v << '\n';
  std::cout << "MAE " << (details.mae ? Fixed(*details.mae, 4) : std::string("n/a")) << '\n';
  for (const auto& a : details.annotations) {
    std::cout << "  " << a.item_id << "  observed " << Fixed(a.observed, 1) << "  predicted "
              << Fixed(a.predicted, 3) << '\n';
  }
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateFlags {
  std::string checkpoint;
  std::string group_only;
  std::string baseline;
  DataFlags data;
  std::vector<std::string> group_by;
  bool jury_level = false;
  std::size_t min_annotators = 10;
  std::string flip_dir;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

void RunEvaluate(const EvaluateFlags& f, const Globals& g) {
  const jury::Dataset test = f.data.Load();
  std::optional<jury::JuryModel> full, group_only, baseline;
  if (!f.checkpoint.empty()) full = jury::LoadCheckpoint(f.checkpoint);
  if (!f.group_only.empty()) group_only = jury::LoadCheckpoint(f.group_only);
  if (!f.baseline.empty()) baseline = jury::LoadCheckpoint(f.baseline);
  if (!full && !group_only && !baseline) {
    throw jury::Error(jury::ErrorCode::kInvalidArgument, "no checkpoint given");
  }
  jury::ReportModels models{baseline ? &*baseline : nullptr, group_only ? &*group_only : nullptr,
                            full ? &*full : nullptr};
  const auto report = jury::GroupedMae(models, test, f.group_by, g.threads);
  Json out{{"mae", jury::MaeReportToJson(report)}};
  std::ostringstream text;
  text << report.ToText();

  const jury::JuryModel* primary = full ? &*full : group_only ? &*group_only : &*baseline;
  if (f.jury_level) {
    Json levels = Json::object();
    auto add = [&](const char* name, const std::optional<jury::JuryModel>& m) {
      if (!m) return;
      const auto r = jury::JuryLevelMaeOf(*m, test, f.min_annotators, g.threads);
      levels[name] = {{"mae", r.mae}, {"n_items", r.n_items}};
      text << "jury-level MAE (" << name << ", items with >= " << f.min_annotators
           << " labels): " << Fixed(r.mae, 4) << " over " << r.n_items << " items\n";
    };
    add("baseline", baseline);
    add("group_only", group_only);
    add("full", full);
    out["jury_level"] = std::move(levels);
  }
  if (!f.flip_dir.empty()) {
    if (!baseline) {
      throw jury::Error(jury::ErrorCode::kInvalidArgument, "--flip needs --baseline");
    }
    std::vector<jury::NamedComposition> compositions;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(f.flip_dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      compositions.push_back({p.stem().string(), jury::ParseComposition(jury::ReadJsonFile(p))});
    }
    jury::VerdictConfig vc;
    vc.n_trials = f.trials;
    vc.seed = f.seed;
    const auto flips = jury::FlipAnalysis(*primary, *baseline, test, compositions, vc, g.threads);
    out["flip"] = jury::FlipReportToJson(flips);
    for (const auto& c : flips.compositions) {
      text << "flip " << c.name << ": " << Fixed(100.0 * c.flip_rate, 1) << "% of "
           << c.n_items << " items; disagreement flipped " << Fixed(c.flipped.rate, 3)
           << " vs unflipped " << Fixed(c.unflipped.rate, 3)
           << (c.z ? ", z = " + Fixed(*c.z, 2) : std::string()) << '\n';
    }
    for (const auto& d : flips.dropped) text << "dropped " << d.name << ": " << d.reason << '\n';
  }
  if (g.json) {
    PrintJson(out);
  } else {
    std::cout << text.str();
  }
}

// ---- serve -----------------------------------------------------------------

jury::Service* g_service = nullptr;

void HandleSignal(int) {
  if (g_service) g_service->Stop();
}

void RunServe(const std::string& checkpoint, const DataFlags& data, const std::string& host,
              int port, std::size_t max_trials, const Globals& g) {
  jury::ServiceConfig config;
  config.host = host;
  config.port = port;
  config.checkpoint = checkpoint;
  config.dataset = data.Paths();
  config.max_trials = max_trials;
  config.threads = g.threads;
  jury::Service service(config);
  service.Load();
  const int bound = service.Bind();
  std::cerr << "listening on http://" << host << ":" << bound << "/v1\n";
  g_service = &service;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  service.Listen();
  g_service = nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-annotator toxicity models, jury verdicts and counterfactual juries"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json, "Print machine-readable JSON");
  app.add_option("--threads", g.threads, "Worker threads (1 = deterministic reference)")
      ->check(CLI::PositiveNumber);

  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", synth_spec, "Synthetic spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_flags.data.Add(train);
  train->add_option("--config", train_flags.config, "JSON with optional \"model\" and \"train\"");
  train->add_option("--out", train_flags.out, "Checkpoint path")->required();
  train->add_option("--report", train_flags.report, "Training report path");
  train->add_option("--ablation", train_flags.ablation, "full | group-only | aggregate")
      ->check(CLI::IsMember({"full", "group-only", "aggregate"}));
  train->add_option("--test-fraction", train_flags.test_fraction, "Hold out this share of items")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--split-seed", train_flags.split_seed, "Seed of the held-out split");

  VerdictFlags verdict_flags;
  auto* verdict = app.add_subcommand("verdict", "Classify an item with a jury");
  verdict->add_option("--checkpoint", verdict_flags.checkpoint)->required();
  verdict_flags.data.Add(verdict);
  verdict->add_option("--composition", verdict_flags.composition, "Composition JSON")->required();
  verdict_flags.item.Add(verdict);
  verdict->add_option("--trials", verdict_flags.trials, "Juries sampled")->check(CLI::PositiveNumber);
  verdict->add_option("--seed", verdict_flags.seed);
  verdict->add_option("--threshold", verdict_flags.threshold)->check(CLI::Range(0.0, 4.0));
  verdict->add_flag("--table", verdict_flags.table, "Human-readable summary and roster");

  CounterfactualFlags cf_flags;
  auto* cf = app.add_subcommand("counterfactual", "Minimal jury edits that flip the verdict");
  cf->add_option("--checkpoint", cf_flags.checkpoint)->required();
  cf_flags.data.Add(cf);
  cf->add_option("--composition", cf_flags.composition)->required();
  cf_flags.item.Add(cf);
  cf->add_option("--k-best", cf_flags.k_best)->check(CLI::PositiveNumber);
  cf->add_flag("--non-strict", cf_flags.non_strict, "Allow landing exactly on the threshold");
  cf->add_option("--threshold", cf_flags.threshold)->check(CLI::Range(0.0, 4.0));

  std::string cond_checkpoint, cond_policy, cond_text;
  auto* cond = app.add_subcommand("conditional", "Resolve a conditional jury policy for a text");
  cond->add_option("--checkpoint", cond_checkpoint, "Needed for embedding rules");
  cond->add_option("--policy", cond_policy)->required();
  cond->add_option("--text", cond_text)->required();

  std::string juror_checkpoint, juror_id;
  DataFlags juror_data;
  auto* juror = app.add_subcommand("juror", "Show a juror's profile and annotations");
  juror->add_option("--checkpoint", juror_checkpoint)->required();
  juror_data.Add(juror);
  juror->add_option("--id", juror_id)->required();

  EvaluateFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Per-group MAE, jury-level MAE and flip analysis");
  evaluate->add_option("--checkpoint", eval_flags.checkpoint, "Full model");
  evaluate->add_option("--group-only", eval_flags.group_only, "Group-only model");
  evaluate->add_option("--baseline", eval_flags.baseline, "Aggregate baseline model");
  eval_flags.data.Add(evaluate);
  evaluate->add_option("--group-by", eval_flags.group_by, "Attributes to break MAE down by")
      ->delimiter(',');
  evaluate->add_flag("--jury-level", eval_flags.jury_level);
  evaluate->add_option("--min-annotators", eval_flags.min_annotators);
  evaluate->add_option("--flip", eval_flags.flip_dir, "Directory of composition JSON files");
  evaluate->add_option("--trials", eval_flags.trials)->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", eval_flags.seed);

  std::string serve_checkpoint, serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::size_t serve_max_trials = 1000;
  DataFlags serve_data;
  auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve->add_option("--checkpoint", serve_checkpoint)->required();
  serve_data.Add(serve);
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port)->check(CLI::Range(0, 65535));
  serve->add_option("--max-trials", serve_max_trials)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) RunSynth(synth_spec, synth_out, g);
    if (*train) RunTrain(train_flags, g);
    if (*verdict) RunVerdict(verdict_flags, g);
    if (*cf) return RunCounterfactual(cf_flags, g);
    if (*cond) RunConditional(cond_checkpoint, cond_policy, cond_text, g);
    if (*juror) RunJuror(juror_checkpoint, juror_data, juror_id, g);
    if (*evaluate) RunEvaluate(eval_flags, g);
    if (*serve) RunServe(serve_checkpoint, serve_data, serve_host, serve_port, serve_max_trials, g);
  } catch (const jury::Error& e) {
    std::cerr << "jurylearn: " << jury::ErrorCodeName(e.code()) << ": " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << '\n';
    return (*train || *synth) ? 1 : ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "jurylearn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
