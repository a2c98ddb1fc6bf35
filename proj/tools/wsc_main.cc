// SPDX-License-Identifier: Apache-2.0
//
// wsc: offline pipeline (label -> fit -> eval -> replay -> analyze) and the
// chop-decision sidecar (serve).
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wsc/analytics.h"
#include "wsc/binary_io.h"
#include "wsc/chop_policy.h"
#include "wsc/errors.h"
#include "wsc/labeler.h"
#include "wsc/pipeline.h"
#include "wsc/probe.h"
#include "wsc/replay.h"
#include "wsc/service.h"
#include "wsc/trace.h"
#include "wsc/vector_table.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct PolicyFlags {
  double thresh = 0.5;
  std::size_t streak_len = 2;
  std::size_t len_threshold = 10;
  std::size_t short_streak_len = 5;
  std::optional<std::size_t> regen_budget;
  bool multi_chop = false;
  std::string chop_extent = "chunk";

  void Register(CLI::App* cmd) {
    cmd->add_option("--thresh", thresh, "Repetition probability threshold")
        ->capture_default_str();
    cmd->add_option("--streak-len", streak_len,
                    "Consecutive long flagged chunks that trigger a chop")
        ->capture_default_str();
    cmd->add_option("--len-threshold", len_threshold,
                    "Chunks with at least this many tokens are long")
        ->capture_default_str();
    cmd->add_option("--short-streak-len", short_streak_len,
                    "Consecutive short flagged chunks that trigger a chop")
        ->capture_default_str();
    cmd->add_option("--regen-budget", regen_budget,
                    "Rescue regeneration budget in tokens (default: per "
                    "model/task lookup, 4096 fallback)");
    cmd->add_flag("--multi-chop", multi_chop,
                  "Keep detecting after the first chop");
    cmd->add_option("--chop-extent", chop_extent,
                    "Tokens removed at a chop: the triggering chunk, or the "
                    "whole streak")
        ->check(CLI::IsMember({"chunk", "streak"}))
        ->capture_default_str();
  }

  wsc::PolicyConfig Build(std::size_t budget) const {
    wsc::PolicyConfig c;
    c.thresh = thresh;
    c.streak_len = streak_len;
    c.len_threshold = len_threshold;
    c.short_streak_len = short_streak_len;
    c.regen_budget = regen_budget.value_or(budget);
    c.single_chop = !multi_chop;
    c.chop_extent = chop_extent == "streak" ? wsc::ChopExtent::kWholeStreak
                                            : wsc::ChopExtent::kTriggeringChunk;
    c.Validate();
    return c;
  }
};

std::string Fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void WriteText(const std::string& path, const std::string& text) {
  wsc::WriteFileBytes(
      path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                      text.size()));
}

// --- label -----------------------------------------------------------------

struct LabelArgs {
  std::string manifest, embeddings, out;
  wsc::LabelerConfig config;
};

int RunLabel(const LabelArgs& a) {
  a.config.Validate();
  auto traces = wsc::ReadManifest(a.manifest);
  const auto table = wsc::LoadVectorTable(a.embeddings);
  const auto rows = wsc::ResolveFirstRows(traces, wsc::VectorKind::kEmbedding);
  std::size_t chunks = 0, salad = 0, with_point = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto labels = wsc::LabelTrace(traces[i], table, rows[i], a.config);
    chunks += labels.salad.size();
    for (int y : labels.salad) salad += y;
    with_point += labels.chopping_point.has_value();
  }
  wsc::WriteManifest(a.out.empty() ? a.manifest : a.out, traces);
  std::cout << json{{"traces", traces.size()},
                    {"chunks", chunks},
                    {"salad_chunks", salad},
                    {"traces_with_chopping_point", with_point}}
                   .dump()
            << '\n';
  return kExitOk;
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string manifest, hidden, out;
  wsc::TrainConfig config;
  bool no_rebalance = false;
  bool no_pos_weight = false;
};

int RunFit(FitArgs a) {
  a.config.rebalance = !a.no_rebalance;
  a.config.use_pos_weight = !a.no_pos_weight;
  a.config.Validate();
  const auto traces = wsc::ReadManifest(a.manifest);
  const auto table = wsc::LoadVectorTable(a.hidden);
  const auto dataset = wsc::CollectTrainingSet(traces, table);
  const auto prepared = wsc::PrepareDataset(dataset, a.config);
  const wsc::ProbeModel model = wsc::Fit(prepared, a.config);
  wsc::SaveProbeModel(a.out, model);
  const auto train = wsc::Evaluate(model, prepared.data);
  json report = model.meta();
  report["train_accuracy"] = train.accuracy;
  if (train.auroc) report["train_auroc"] = *train.auroc;
  report["model"] = a.out;
  std::cout << report.dump() << '\n';
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string model, manifest, hidden;
  double threshold = 0.5;
};

int RunEval(const EvalArgs& a) {
  const auto model = wsc::LoadProbeModel(a.model);
  const auto traces = wsc::ReadManifest(a.manifest);
  const auto table = wsc::LoadVectorTable(a.hidden);
  const auto dataset = wsc::CollectTrainingSet(traces, table);
  const auto r = wsc::Evaluate(model, dataset, a.threshold);
  json j{{"count", r.count},
         {"positives", r.positives},
         {"accuracy", r.accuracy},
         {"auroc", r.auroc ? json(*r.auroc) : json(nullptr)}};
  std::cout << j.dump() << '\n';
  std::cout << "Acc. / AUROC: " << Fixed2(100.0 * r.accuracy) << " / "
            << (r.auroc ? Fixed2(100.0 * *r.auroc) : std::string("n/a"))
            << '\n';
  if (!r.auroc) std::cerr << "wsc: AUROC undefined for single-class data\n";
  return kExitOk;
}

// --- replay ----------------------------------------------------------------

struct ReplayArgs {
  std::string model, manifest, hidden, out;
  PolicyFlags policy;
};

int RunReplay(const ReplayArgs& a) {
  const auto model = wsc::LoadProbeModel(a.model);
  const auto traces = wsc::ReadManifest(a.manifest);
  const auto table = wsc::LoadVectorTable(a.hidden);
  const auto rows = wsc::ResolveFirstRows(traces, wsc::VectorKind::kHidden);
  std::ostringstream lines;
  std::size_t total = 0, kept = 0, chopped = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    const auto config = a.policy.Build(
        wsc::RegenBudgetFor(t.model_id, t.task, t.temperature));
    const auto report = wsc::Replay(t, table, rows[i], model, config);
    lines << wsc::ToJson(report).dump() << '\n';
    total += t.total_tokens();
    kept += report.kept_tokens;
    chopped += report.chop_index.has_value();
  }
  if (!a.out.empty()) WriteText(a.out, lines.str());
  std::cout << lines.str();
  json summary{{"traces", traces.size()},
               {"chopped_traces", chopped},
               {"original_tokens", total},
               {"kept_tokens", kept}};
  if (total > 0) {
    summary["length_savings_pct"] =
        wsc::Round2(wsc::LengthSavings(static_cast<double>(total),
                                       static_cast<double>(kept)));
  }
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string manifest, csv;
  std::size_t consecutive = 2;
};

int RunAnalyze(const AnalyzeArgs& a) {
  const auto traces = wsc::ReadManifest(a.manifest);
  const auto stats = wsc::ComputeChunkLabelStats(traces, a.consecutive);
  if (!a.csv.empty()) WriteText(a.csv, wsc::ToCsv(stats));
  std::cout << wsc::ToJson(stats).dump(2) << '\n';
  return kExitOk;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string listen, model;
  PolicyFlags policy;
};

int RunServe(const ServeArgs& a) {
  auto [host, port] = wsc::ParseEndpoint(a.listen);
  auto model = wsc::LoadProbeModel(a.model);
  const std::size_t dim = model.dim();
  const auto config = a.policy.Build(wsc::kDefaultRegenBudget);

  // Block termination signals before any thread starts; the main thread
  // waits for them synchronously.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  wsc::Server server(std::move(model), config);
  server.Listen(host, port);
  server.Start();
  std::cerr << "wsc: serving dim-" << dim << " probe on " << host << ':'
            << server.port() << '\n';
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "wsc: shutting down\n";
  server.Stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-salad chopper: detect, chop and regenerate repetitive "
               "reasoning chunks"};
  app.require_subcommand(1);

  LabelArgs label;
  auto* label_cmd = app.add_subcommand(
      "label", "Label salad chunks from embeddings and write train labels");
  label_cmd->add_option("--manifest", label.manifest, "Trace manifest (JSONL)")
      ->required();
  label_cmd->add_option("--embeddings", label.embeddings,
                        "Chunk embedding vector table")
      ->required();
  label_cmd->add_option("--theta", label.config.theta, "Similarity threshold")
      ->capture_default_str();
  label_cmd->add_option("--window", label.config.window, "Lookback in chunks")
      ->capture_default_str();
  label_cmd->add_option("--consecutive", label.config.consecutive_required,
                        "Salad run length that sets the chopping point")
      ->capture_default_str();
  label_cmd->add_option("--out", label.out,
                        "Output manifest (default: rewrite --manifest)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train the linear probe");
  fit_cmd->add_option("--manifest", fit.manifest)->required();
  fit_cmd->add_option("--hidden", fit.hidden, "Hidden-state vector table")
      ->required();
  fit_cmd->add_option("--lr", fit.config.learning_rate)->capture_default_str();
  fit_cmd->add_option("--weight-decay", fit.config.weight_decay)
      ->capture_default_str();
  fit_cmd->add_option("--epochs", fit.config.epochs)->capture_default_str();
  fit_cmd->add_option("--batch", fit.config.batch_size)->capture_default_str();
  fit_cmd->add_option("--seed", fit.config.seed)->capture_default_str();
  fit_cmd->add_flag("--no-rebalance", fit.no_rebalance,
                    "Train on the raw class ratio");
  fit_cmd->add_flag("--no-pos-weight", fit.no_pos_weight,
                    "Do not weight the positive class");
  fit_cmd->add_option("--out", fit.out, "Output model file")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and AUROC of a probe");
  eval_cmd->add_option("--model", eval.model)->required();
  eval_cmd->add_option("--manifest", eval.manifest)->required();
  eval_cmd->add_option("--hidden", eval.hidden)->required();
  eval_cmd->add_option("--threshold", eval.threshold)->capture_default_str();

  ReplayArgs replay;
  auto* replay_cmd =
      app.add_subcommand("replay", "Re-enact detect/chop over recorded traces");
  replay_cmd->add_option("--model", replay.model)->required();
  replay_cmd->add_option("--manifest", replay.manifest)->required();
  replay_cmd->add_option("--hidden", replay.hidden)->required();
  replay_cmd->add_option("--out", replay.out, "Also write reports as JSONL");
  replay.policy.Register(replay_cmd);

  AnalyzeArgs analyze;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Salad token/chunk statistics");
  analyze_cmd->add_option("--manifest", analyze.manifest)->required();
  analyze_cmd->add_option("--consecutive", analyze.consecutive)
      ->capture_default_str();
  analyze_cmd->add_option("--csv", analyze.csv, "Also write a CSV table");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the chop-decision sidecar");
  serve_cmd->add_option("--listen", serve.listen, "HOST:PORT")->required();
  serve_cmd->add_option("--model", serve.model)->required();
  serve.policy.Register(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*label_cmd) return RunLabel(label);
    if (*fit_cmd) return RunFit(fit);
    if (*eval_cmd) return RunEval(eval);
    if (*replay_cmd) return RunReplay(replay);
    if (*analyze_cmd) return RunAnalyze(analyze);
    if (*serve_cmd) return RunServe(serve);
  } catch (const wsc::IoError& e) {
    std::cerr << "wsc: " << e.what() << '\n';
    return kExitIo;
  } catch (const wsc::Error& e) {
    std::cerr << "wsc: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
