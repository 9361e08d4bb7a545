// scibench command-line front end.
//
// Exit codes: 0 success, 1 validation failure (bad config, bad records,
// failed checks), 2 stage failure.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "scibench/dpo.hpp"
#include "scibench/error.hpp"
#include "scibench/eval.hpp"
#include "scibench/io.hpp"
#include "scibench/judge.hpp"
#include "scibench/manifest.hpp"
#include "scibench/pipeline.hpp"
#include "scibench/records.hpp"
#include "scibench/report.hpp"

namespace {

using namespace scibench;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitStage = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string format = "markdown";
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "Pipeline config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--jobs", c.jobs, "Worker thread cap (0 = all cores)");
}

PipelineConfig load_config(const Common& c) {
  return load_pipeline_config(c.config, ConfigOverrides{c.seed, c.jobs});
}

std::optional<PipelineConfig> maybe_config(const Common& c) {
  if (c.config.empty()) return std::nullopt;
  return load_config(c);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_stage(const StageSummary& s) {
  fmt::print("{:<9} in={:<8} out={:<8}{}\n", s.stage, s.in, s.out, s.skipped ? " (skipped: no input)" : "");
  for (const auto& [k, v] : s.reasons) fmt::print("    {:<28} {}\n", k, v);
  for (const auto& w : s.warnings) fmt::print("    warning: {}\n", w);
}

void print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks) fmt::print("{:<4}  {:<32} {}\n", to_string(c.status), c.name, c.detail);
}

bool any_failed(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::kFail) return true;
  }
  return false;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    io::write_file_atomic(out, text);
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kStageFailure:
    case ErrorCode::kIoError:
    case ErrorCode::kClassifierUnavailable:
    case ErrorCode::kJudgeUnavailable:
      return kExitStage;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus curation and benchmark scoring toolkit"};
  app.require_subcommand(1);

  Common common;

  // Data pipeline stages.
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run clean -> dedup -> balance -> sequence");
  add_common(pipeline_cmd, common, true);
  auto* clean_cmd = app.add_subcommand("clean", "Filter, scrub and validate documents");
  add_common(clean_cmd, common, true);
  auto* dedup_cmd = app.add_subcommand("dedup", "Remove near-duplicate documents");
  add_common(dedup_cmd, common, true);
  auto* balance_cmd = app.add_subcommand("balance", "Rebalance instruction pairs to target proportions");
  add_common(balance_cmd, common, true);
  auto* sequence_cmd = app.add_subcommand("sequence", "Build the two-stage training schedule");
  add_common(sequence_cmd, common, true);

  // Evaluation.
  std::string gold_path, pred_a_path, pred_b_path, out_path;
  std::string model_a = "model_a", model_b = "model_b";
  std::size_t bootstrap = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold instances");
  add_common(eval_cmd, common, false);
  eval_cmd->add_option("--gold", gold_path, "Gold instances (JSONL)")->required();
  eval_cmd->add_option("--pred-a", pred_a_path, "Model A predictions (JSONL)")->required();
  eval_cmd->add_option("--pred-b", pred_b_path, "Model B predictions (JSONL)");
  eval_cmd->add_option("--model-a", model_a, "Display name of model A");
  eval_cmd->add_option("--model-b", model_b, "Display name of model B");
  eval_cmd->add_option("--bootstrap", bootstrap, "Bootstrap resamples for 95% intervals (stderr)");
  eval_cmd->add_option("--format", common.format, "markdown|csv")->check(CLI::IsMember({"markdown", "csv"}));
  eval_cmd->add_option("--out", out_path, "Write the report here instead of stdout");

  std::string items_path, judge_fixture;
  std::optional<double> tie_margin;
  auto* judge_cmd = app.add_subcommand("judge", "Pairwise judging with position swap");
  add_common(judge_cmd, common, false);
  judge_cmd->add_option("--items", items_path, "Judge items (JSONL)")->required();
  judge_cmd->add_option("--fixture", judge_fixture, "Offline judge fixture (JSONL)");
  judge_cmd->add_option("--tie-margin", tie_margin, "Score gap below which a pair is a tie");
  judge_cmd->add_option("--out", out_path, "Verdict records (JSONL)");

  std::string prefs_path, human_labels, ai_labels, logprobs_path;
  auto* dpo_cmd = app.add_subcommand("dpo-check", "Verify loss, gradient and schedule numerics");
  add_common(dpo_cmd, common, false);
  dpo_cmd->add_option("--preferences", prefs_path, "Preference pairs to validate (JSONL)");
  dpo_cmd->add_option("--human-labels", human_labels, "Human preference labels {id,label} (JSONL)");
  dpo_cmd->add_option("--ai-labels", ai_labels, "AI preference labels {id,label} (JSONL)");
  dpo_cmd->add_option("--logprobs", logprobs_path, "Log-probability records; prints the batch loss");

  std::string report_input;
  auto* report_cmd = app.add_subcommand("report", "Render a stored report (JSON or CSV)");
  report_cmd->add_option("--input", report_input, "Report file")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", common.format, "markdown|csv")->check(CLI::IsMember({"markdown", "csv"}));
  report_cmd->add_option("--out", out_path, "Write here instead of stdout");

  std::string manifest_path;
  double tolerance = 0.01;
  auto* manifest_cmd = app.add_subcommand("validate-manifest", "Check dataset manifest totals and proportions");
  manifest_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  manifest_cmd->add_option("--tolerance", tolerance, "Allowed proportion deviation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pipeline_cmd->parsed()) {
      const PipelineConfig cfg = load_config(common);
      auto classifier = make_classifier(cfg.classifier);
      const PipelineSummary summary = run_pipeline(cfg, classifier.get());
      fmt::print("config {} seed {}\n", summary.config_hash, summary.seed);
      for (const auto& s : summary.stages) print_stage(s);
      return kExitOk;
    }
    if (clean_cmd->parsed() || dedup_cmd->parsed() || balance_cmd->parsed() || sequence_cmd->parsed()) {
      const PipelineConfig cfg = load_config(common);
      try {
        StageSummary s;
        if (clean_cmd->parsed()) {
          auto classifier = make_classifier(cfg.classifier);
          s = run_clean_stage(cfg, classifier.get());
        } else if (dedup_cmd->parsed()) {
          s = run_dedup_stage(cfg);
        } else if (balance_cmd->parsed()) {
          s = run_balance_stage(cfg);
        } else {
          s = run_sequence_stage(cfg);
        }
        print_stage(s);
      } catch (const Error& e) {
        throw Error(ErrorCode::kStageFailure, fmt::format("{}: {}", to_string(e.code()), e.detail()));
      }
      return kExitOk;
    }
    if (eval_cmd->parsed()) {
      const auto cfg = maybe_config(common);
      EvalConfig ec = cfg ? cfg->metrics : EvalConfig{};
      if (bootstrap > 0) ec.bootstrap_samples = bootstrap;
      if (common.seed) ec.seed = *common.seed;
      const auto gold = read_records<Prediction>(gold_path);
      const auto pred_a = read_records<Prediction>(pred_a_path);
      std::optional<std::vector<Prediction>> pred_b;
      if (!pred_b_path.empty()) pred_b = read_records<Prediction>(pred_b_path);
      MetricReport report = run_eval(gold, pred_a, pred_b ? &*pred_b : nullptr, ec);
      report.model_a = model_a;
      report.model_b = model_b;
      if (cfg) report.provenance.emplace_back("config_hash", cfg->config_hash);
      report.provenance.emplace_back("seed", std::to_string(ec.seed));
      report.provenance.emplace_back("gold", gold_path);
      report.provenance.emplace_back("generated_at", utc_now());
      if (ec.bootstrap_samples > 0) {
        for (const auto& s : score_predictions(gold, pred_a, ec)) {
          std::fprintf(stderr, "%s %s: %.4f [%.4f, %.4f]\n", model_a.c_str(), s.task.c_str(), s.score,
                       s.interval->first, s.interval->second);
        }
      }
      emit(emit_report(report, parse_report_format(common.format)), out_path);
      return kExitOk;
    }
    if (judge_cmd->parsed()) {
      const auto cfg = maybe_config(common);
      JudgeSettings js = cfg ? cfg->judge : JudgeSettings{};
      if (!judge_fixture.empty()) js.fixture = judge_fixture;
      if (tie_margin) js.tie_margin = *tie_margin;
      const PromptTemplate prompt = js.prompt_template.empty()
                                        ? PromptTemplate::builtin_v1()
                                        : PromptTemplate::from_file(js.prompt_template, js.prompt_version);
      std::unique_ptr<ExternalJudge> judge;
      if (!js.fixture.empty()) {
        judge = std::make_unique<FixtureJudge>(FixtureJudge::from_file(js.fixture));
      } else {
        HttpEndpoint ep = endpoint_from_env("SCIBENCH_JUDGE_URL", "SCIBENCH_JUDGE_API_KEY");
        if (ep.url.empty()) throw Error(ErrorCode::kInvalidConfig, "set SCIBENCH_JUDGE_URL or pass --fixture");
        ep.max_in_flight = js.max_in_flight * 2;
        judge = std::make_unique<HttpJudge>(ep);
      }
      const auto items = read_records<JudgeItem>(items_path);
      const auto verdicts = judge_all(items, *judge, prompt, js.tie_margin, js.max_in_flight);
      if (!out_path.empty()) {
        std::string lines = fmt::format("# scibench judge prompt={} tie_margin={}\n", prompt.version, js.tie_margin);
        for (const auto& v : verdicts) lines += to_line(v) + "\n";
        io::write_file_atomic(out_path, lines);
      }
      const Tally t = tally(verdicts);
      fmt::print("verdicts {}  wins_a {}  wins_b {}  ties {}\n", t.total(), t.wins_a, t.wins_b, t.ties);
      return kExitOk;
    }
    if (dpo_cmd->parsed()) {
      const auto cfg = maybe_config(common);
      const DpoHyperparams hp = cfg ? cfg->dpo : DpoHyperparams{};
      const std::uint64_t seed = common.seed.value_or(cfg ? cfg->seed : 0);
      std::vector<Check> checks = run_dpo_checks(hp, seed);
      if (!prefs_path.empty()) {
        const auto pairs = read_records<PreferencePair>(prefs_path);
        std::optional<LabelMap> hl, al;
        if (!human_labels.empty()) hl = load_label_map(human_labels);
        if (!ai_labels.empty()) al = load_label_map(ai_labels);
        const auto v = validate_preference_dataset(pairs, hl ? &*hl : nullptr, al ? &*al : nullptr);
        checks.insert(checks.end(), v.report.checks.begin(), v.report.checks.end());
      }
      if (!logprobs_path.empty()) {
        std::vector<PairLogProbs> batch;
        for (const auto& r : read_records<LogProbRecord>(logprobs_path)) batch.push_back(to_pair_logprobs(r));
        const BatchLoss bl = batch_loss(batch, hp.beta, hp.options, common.jobs.value_or(1));
        checks.push_back({"batch_loss", CheckStatus::kPass, fmt::format("mean {:.6f} over {} pairs", bl.mean,
                                                                         bl.per_pair.size())});
      }
      print_checks(checks);
      return any_failed(checks) ? kExitValidation : kExitOk;
    }
    if (report_cmd->parsed()) {
      emit(emit_report(load_report(report_input), parse_report_format(common.format)), out_path);
      return kExitOk;
    }
    if (manifest_cmd->parsed()) {
      const ValidationReport r = validate_manifest(load_manifest(manifest_path), tolerance);
      std::cout << render_report(r);
      return r.has_failures() ? kExitValidation : kExitOk;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitStage;
  }
  return kExitOk;
}
