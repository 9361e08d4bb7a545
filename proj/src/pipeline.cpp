#include "scibench/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "scibench/io.hpp"
#include "scibench/parallel.hpp"

namespace scibench {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<fs::path> existing_paths(const json& list, const fs::path& base, const char* what) {
  std::vector<fs::path> out;
  if (list.is_null()) return out;
  if (list.is_string()) {
    out.push_back(resolve(base, list.get<std::string>()));
  } else {
    for (const auto& p : list) out.push_back(resolve(base, p.get<std::string>()));
  }
  for (const auto& p : out) {
    if (!fs::exists(p)) throw Error(ErrorCode::kInvalidConfig, fmt::format("{} input {} does not exist", what, p.string()));
  }
  return out;
}

DedupConfig dedup_config_from_json(const json& j) {
  DedupConfig c;
  if (j.is_null()) return c;
  c.lsh.num_perms = j.value("num_perms", c.lsh.num_perms);
  c.lsh.bands = j.value("bands", c.lsh.bands);
  c.lsh.rows_per_band = j.value("rows_per_band", c.lsh.rows_per_band);
  c.lsh.jaccard_threshold = j.value("jaccard_threshold", c.lsh.jaccard_threshold);
  c.lsh.seed = j.value("seed", c.lsh.seed);
  c.word_k = j.value("word_k", c.word_k);
  c.char_k = j.value("char_k", c.char_k);
  c.abstract_only = j.value("abstract_only", c.abstract_only);
  if (c.word_k == 0 || c.char_k == 0) throw Error(ErrorCode::kInvalidLshConfig, "shingle sizes must be >= 1");
  c.lsh.validate();
  return c;
}

ClassifierSettings classifier_settings_from_json(const json& j, const fs::path& base) {
  ClassifierSettings s;
  s.endpoint = endpoint_from_env("SCIBENCH_CLASSIFIER_URL", "SCIBENCH_API_KEY");
  if (j.is_null()) return s;
  const std::string mode = j.value("mode", std::string("none"));
  if (mode == "none") {
    s.mode = ClassifierMode::kNone;
  } else if (mode == "fixture") {
    s.mode = ClassifierMode::kFixture;
    s.fixture = existing_paths(j.at("fixture"), base, "classifier fixture").front();
    if (j.contains("default_label")) s.default_label = j.at("default_label").get<std::string>();
  } else if (mode == "http") {
    s.mode = ClassifierMode::kHttp;
    if (s.endpoint.url.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "classifier mode http needs SCIBENCH_CLASSIFIER_URL");
    }
  } else {
    throw Error(ErrorCode::kInvalidConfig, "classifier.mode must be none, fixture or http");
  }
  s.endpoint.max_in_flight = j.value("max_in_flight", s.endpoint.max_in_flight);
  s.endpoint.max_retries = j.value("max_retries", s.endpoint.max_retries);
  if (j.contains("timeout_ms")) s.endpoint.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
  return s;
}

JudgeSettings judge_settings_from_json(const json& j, const fs::path& base) {
  JudgeSettings s;
  if (j.is_null()) return s;
  s.tie_margin = j.value("tie_margin", s.tie_margin);
  if (!(s.tie_margin >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "judge.tie_margin must be >= 0");
  s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
  if (s.max_in_flight == 0) throw Error(ErrorCode::kInvalidConfig, "judge.max_in_flight must be >= 1");
  if (j.contains("prompt_template")) {
    s.prompt_template = existing_paths(j.at("prompt_template"), base, "judge prompt").front();
  }
  s.prompt_version = j.value("prompt_version", s.prompt_version);
  if (j.contains("fixture")) s.fixture = existing_paths(j.at("fixture"), base, "judge fixture").front();
  return s;
}

const json& section(const json& j, const char* key) {
  static const json kNull;
  auto it = j.find(key);
  return it == j.end() ? kNull : *it;
}

std::string header_line(const char* stage, const PipelineConfig& cfg) {
  return fmt::format("# scibench stage={} config={} seed={}\n", stage, cfg.config_hash, cfg.seed);
}

fs::path out_path(const PipelineConfig& cfg, const char* name) { return cfg.output_dir / name; }

void write_summary(const PipelineConfig& cfg, const StageSummary& s) {
  io::write_file_atomic(cfg.output_dir / (s.stage + ".summary.json"), summary_to_json(s, cfg));
}

template <class T>
std::vector<T> read_stage_input(const fs::path& p, const char* stage) {
  if (!fs::exists(p)) {
    throw Error(ErrorCode::kIoError, fmt::format("{} stage input {} is missing; run the previous stage first",
                                                 stage, p.string()));
  }
  return read_records<T>(p);
}

std::set<std::string> removed_document_ids(const PipelineConfig& cfg) {
  std::set<std::string> removed;
  const fs::path rejects = out_path(cfg, outputs::kCleanRejects);
  if (fs::exists(rejects)) {
    io::for_each_line(rejects, [&](std::string_view line, std::size_t) {
      if (line.empty() || line.front() == '#') return;
      removed.insert(json::parse(line).at("id").get<std::string>());
    });
  }
  const fs::path clusters = out_path(cfg, outputs::kDedupClusters);
  if (fs::exists(clusters)) {
    io::for_each_line(clusters, [&](std::string_view line, std::size_t) {
      if (line.empty() || line.front() == '#') return;
      std::size_t pos = line.find('\t');
      while (pos != std::string_view::npos) {
        const std::size_t next = line.find('\t', pos + 1);
        removed.emplace(line.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1));
        pos = next;
      }
    });
  }
  return removed;
}

CategoryFn category_for(const std::string& key) {
  if (key == "domain") return domain_category;
  if (key == "origin") return [](const InstructionPair& p) { return std::string(to_string(p.effective_origin())); };
  if (key == "task") return [](const InstructionPair& p) { return std::string(to_string(p.task)); };
  throw Error(ErrorCode::kInvalidConfig, "balance.key must be domain, origin or task");
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& raw, const fs::path& base_dir, const ConfigOverrides& overrides) {
  if (!raw.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  json j = raw;
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (overrides.jobs) j["jobs"] = *overrides.jobs;

  PipelineConfig cfg;
  try {
    const json& inputs = section(j, "input_paths");
    cfg.documents = existing_paths(section(inputs, "documents"), base_dir, "documents");
    cfg.instruction_pairs = existing_paths(section(inputs, "instruction_pairs"), base_dir, "instruction_pairs");
    cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.cleaning = filter_config_from_json(section(j, "cleaning"));
    cfg.classifier = classifier_settings_from_json(section(j, "classifier"), base_dir);
    cfg.dedup = dedup_config_from_json(section(j, "dedup"));
    cfg.dedup.jobs = cfg.jobs;
    const json& balance = section(j, "balance");
    if (!balance.is_null()) {
      if (balance.contains("targets")) cfg.balance_targets = balance.at("targets").get<std::map<std::string, double>>();
      cfg.balance_key = balance.value("key", cfg.balance_key);
      category_for(cfg.balance_key);
    }
    const json& curriculum = section(j, "curriculum");
    cfg.curriculum = stage_config_from_json(curriculum);
    cfg.scorer = default_scorer_from_json(section(curriculum, "scorer"));
    cfg.metrics = eval_config_from_json(section(j, "metrics"));
    cfg.metrics.seed = cfg.seed;
    cfg.judge = judge_settings_from_json(section(j, "judge"), base_dir);
    cfg.dpo = dpo_hyperparams_from_json(section(j, "dpo"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }

  json hashed = j;
  hashed.erase("jobs");
  cfg.config_hash = io::hex64(io::fnv1a64(hashed.dump()));
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path(), overrides);
}

std::unique_ptr<ExternalClassifier> make_classifier(const ClassifierSettings& s) {
  switch (s.mode) {
    case ClassifierMode::kNone: return nullptr;
    case ClassifierMode::kFixture:
      return std::make_unique<FixtureClassifier>(FixtureClassifier::from_file(s.fixture, s.default_label));
    case ClassifierMode::kHttp: return std::make_unique<HttpClassifier>(s.endpoint);
  }
  return nullptr;
}

StageSummary run_clean_stage(const PipelineConfig& cfg, ExternalClassifier* classifier) {
  std::vector<Document> docs;
  for (const auto& p : cfg.documents) {
    auto part = read_records<Document>(p);
    docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  check_unique_ids(docs);

  std::vector<CleanOutcome> outcomes(docs.size());
  parallel_for(docs.size(), cfg.jobs,
               [&](std::size_t i) { outcomes[i] = clean_document(docs[i], cfg.cleaning, classifier); });

  StageSummary s;
  s.stage = "clean";
  s.in = docs.size();
  std::string kept = header_line("clean", cfg);
  std::string rejects = header_line("clean", cfg);
  for (const auto& o : outcomes) {
    for (const auto& [name, n] : o.redactions) s.counters["redacted_" + name] += n;
    if (o.decision.accepted()) {
      kept += to_line(o.document);
      kept += '\n';
      ++s.out;
      continue;
    }
    ojson r;
    r["id"] = o.document.id;
    r["reasons"] = ojson::array();
    std::set<std::string> rules;
    for (const auto& reason : o.decision.reasons) {
      r["reasons"].push_back({{"rule", reason.rule}, {"evidence", reason.evidence}});
      rules.insert(reason.rule);
    }
    for (const auto& rule : rules) ++s.reasons[rule];
    rejects += r.dump(-1, ' ', false, json::error_handler_t::replace);
    rejects += '\n';
  }
  s.counters["rejected"] = s.in - s.out;
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(out_path(cfg, outputs::kClean), kept);
  io::write_file_atomic(out_path(cfg, outputs::kCleanRejects), rejects);
  write_summary(cfg, s);
  return s;
}

StageSummary run_dedup_stage(const PipelineConfig& cfg) {
  const auto docs = read_stage_input<Document>(out_path(cfg, outputs::kClean), "dedup");
  const auto clusters = find_near_duplicates(docs, cfg.dedup);

  std::unordered_set<std::string> drop;
  StageSummary s;
  s.stage = "dedup";
  s.in = docs.size();
  for (const auto& c : clusters) {
    for (const auto& m : c.members) {
      if (m != c.representative) drop.insert(m);
    }
  }
  s.counters["clusters"] = clusters.size();
  s.reasons["near_duplicate"] = drop.size();

  std::string kept = header_line("dedup", cfg);
  for (const auto& d : docs) {
    if (drop.count(d.id)) continue;
    kept += to_line(d);
    kept += '\n';
    ++s.out;
  }
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(out_path(cfg, outputs::kDedup), kept);
  io::write_file_atomic(out_path(cfg, outputs::kDedupClusters), header_line("dedup", cfg) + format_clusters(clusters));
  write_summary(cfg, s);
  return s;
}

StageSummary run_balance_stage(const PipelineConfig& cfg) {
  std::vector<InstructionPair> pairs;
  for (const auto& p : cfg.instruction_pairs) {
    auto part = read_records<InstructionPair>(p);
    pairs.insert(pairs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  StageSummary s;
  s.stage = "balance";
  s.in = pairs.size();

  const auto removed = removed_document_ids(cfg);
  std::vector<InstructionPair> linked;
  linked.reserve(pairs.size());
  for (auto& p : pairs) {
    if (p.doc_id && removed.count(*p.doc_id)) {
      ++s.reasons["source_document_removed"];
      continue;
    }
    linked.push_back(std::move(p));
  }

  std::vector<InstructionPair> kept;
  if (linked.empty()) {
    s.skipped = true;
  } else if (cfg.balance_targets.empty()) {
    kept = std::move(linked);
  } else {
    const std::size_t before = linked.size();
    kept = balance_proportions(linked, cfg.balance_targets, cfg.seed, category_for(cfg.balance_key));
    s.reasons["downsampled"] = before - kept.size();
  }
  std::map<std::string, std::size_t> per_category;
  const CategoryFn cat = category_for(cfg.balance_key);
  for (const auto& p : kept) ++per_category[cat(p)];
  for (const auto& [c, n] : per_category) s.counters["category_" + c] = n;
  s.out = kept.size();

  std::string out = header_line("balance", cfg);
  for (const auto& p : kept) {
    out += to_line(p);
    out += '\n';
  }
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(out_path(cfg, outputs::kBalance), out);
  write_summary(cfg, s);
  return s;
}

StageSummary run_sequence_stage(const PipelineConfig& cfg) {
  const auto pairs = read_stage_input<InstructionPair>(out_path(cfg, outputs::kBalance), "sequence");
  StageSummary s;
  s.stage = "sequence";
  s.in = pairs.size();
  std::string out = header_line("sequence", cfg);
  if (pairs.empty()) {
    s.skipped = true;
  } else {
    const TrainingSchedule sched = build_stage_schedule(pairs, cfg.curriculum, cfg.scorer, cfg.seed, cfg.jobs);
    for (const auto& e : sched.entries) {
      out += to_line(e);
      out += '\n';
    }
    s.out = sched.entries.size();
    s.counters["stage1"] = sched.stage1_count;
    s.counters["stage2_new"] = sched.stage2_new_count;
    s.counters["stage2_replay"] = sched.stage2_replay_count;
    s.counters["unscheduled"] = pairs.size() - sched.stage1_count - sched.stage2_new_count;
    s.warnings = sched.warnings;
  }
  fs::create_directories(cfg.output_dir);
  io::write_file_atomic(out_path(cfg, outputs::kSchedule), out);
  write_summary(cfg, s);
  return s;
}

PipelineSummary run_pipeline(const PipelineConfig& cfg, ExternalClassifier* classifier) {
  PipelineSummary summary{cfg.config_hash, cfg.seed, {}};
  auto guarded = [&](const char* stage, auto&& fn) {
    try {
      summary.stages.push_back(fn());
    } catch (const Error& e) {
      throw Error(ErrorCode::kStageFailure,
                  fmt::format("{}: {}: {}", stage, to_string(e.code()), e.detail()));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStageFailure, fmt::format("{}: {}", stage, e.what()));
    }
  };
  guarded("clean", [&] { return run_clean_stage(cfg, classifier); });
  guarded("dedup", [&] { return run_dedup_stage(cfg); });
  guarded("balance", [&] { return run_balance_stage(cfg); });
  guarded("sequence", [&] { return run_sequence_stage(cfg); });
  io::write_file_atomic(out_path(cfg, outputs::kSummary), summary_to_json(summary));
  return summary;
}

namespace {

ojson stage_json(const StageSummary& s) {
  ojson j;
  j["stage"] = s.stage;
  j["in"] = s.in;
  j["out"] = s.out;
  j["skipped"] = s.skipped;
  j["reasons"] = ojson::object();
  for (const auto& [k, v] : s.reasons) j["reasons"][k] = v;
  j["counters"] = ojson::object();
  for (const auto& [k, v] : s.counters) j["counters"][k] = v;
  j["warnings"] = s.warnings;
  return j;
}

}  // namespace

std::string summary_to_json(const StageSummary& s, const PipelineConfig& cfg) {
  ojson j;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  const ojson body = stage_json(s);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string summary_to_json(const PipelineSummary& s) {
  ojson j;
  j["config_hash"] = s.config_hash;
  j["seed"] = s.seed;
  j["stages"] = ojson::array();
  for (const auto& st : s.stages) j["stages"].push_back(stage_json(st));
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace scibench
