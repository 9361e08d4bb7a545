#include "scibench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "scibench/io.hpp"
#include "scibench/text.hpp"

namespace scibench {

using json = nlohmann::json;

namespace {

struct InstanceStat {
  PRF prf;
  BleuStats bleu;
  double value = 0.0;
};

TokenMode token_mode(const Prediction& gold, const Prediction& pred, const EvalConfig& cfg) {
  if (gold.lang) return *gold.lang;
  if (pred.lang) return *pred.lang;
  return cfg.default_token_mode;
}

std::vector<TokenSequence> reference_tokens(const Prediction& gold, TokenMode mode) {
  std::vector<TokenSequence> refs;
  if (gold.references.empty()) {
    refs.push_back(tokenize(gold.text, mode));
  } else {
    for (const auto& r : gold.references) refs.push_back(tokenize(r, mode));
  }
  return refs;
}

InstanceStat score_instance(MetricKind kind, const Prediction& gold, const Prediction& pred, const EvalConfig& cfg) {
  InstanceStat s;
  const TokenMode mode = token_mode(gold, pred, cfg);
  switch (kind) {
    case MetricKind::kEntityF1: s.prf = ner_strict_f1(pred.entities, gold.entities); break;
    case MetricKind::kTripleF1: s.prf = re_micro_f1(pred.triples, gold.triples); break;
    case MetricKind::kItemF1: s.prf = set_f1(pred.items, gold.items); break;
    case MetricKind::kRougeL: {
      const TokenSequence cand = tokenize(pred.text, mode);
      bool any = false;
      for (const auto& ref : reference_tokens(gold, mode)) {
        if (ref.tokens.empty()) continue;
        s.value = std::max(s.value, rouge_l(cand, ref));
        any = true;
      }
      if (!any) throw Error(ErrorCode::kEmptyReference, "instance " + gold.id + " has no nonempty reference");
      break;
    }
    case MetricKind::kCorpusBleu:
      s.bleu = bleu_stats(tokenize(pred.text, mode), reference_tokens(gold, mode), 4);
      break;
    case MetricKind::kAccuracy:
      s.value = text::collapse_whitespace(pred.text) == text::collapse_whitespace(gold.text) ? 1.0 : 0.0;
      break;
    case MetricKind::kTopicTerms: s.value = score_topic_terms(pred.items, gold.items, cfg.topic_mode).score; break;
  }
  return s;
}

double aggregate(MetricKind kind, const std::vector<InstanceStat>& stats, const std::vector<std::size_t>& idx,
                 const EvalConfig& cfg) {
  switch (kind) {
    case MetricKind::kEntityF1:
    case MetricKind::kTripleF1:
    case MetricKind::kItemF1: {
      PRF total;
      for (std::size_t i : idx) total += stats[i].prf;
      return total.f1;
    }
    case MetricKind::kCorpusBleu: {
      BleuStats total(4);
      for (std::size_t i : idx) total += stats[i].bleu;
      return total.score(cfg.bleu_smoothing);
    }
    case MetricKind::kRougeL:
    case MetricKind::kAccuracy:
    case MetricKind::kTopicTerms: {
      double sum = 0.0;
      for (std::size_t i : idx) sum += stats[i].value;
      return idx.empty() ? 0.0 : sum / static_cast<double>(idx.size());
    }
  }
  return 0.0;
}

std::pair<double, double> bootstrap_interval(MetricKind kind, const std::vector<InstanceStat>& stats,
                                             const EvalConfig& cfg, std::string_view task) {
  std::mt19937_64 rng(cfg.seed ^ io::fnv1a64(task));
  std::uniform_int_distribution<std::size_t> pick(0, stats.size() - 1);
  std::vector<double> samples(cfg.bootstrap_samples);
  std::vector<std::size_t> idx(stats.size());
  for (auto& v : samples) {
    for (auto& i : idx) i = pick(rng);
    v = aggregate(kind, stats, idx, cfg);
  }
  std::sort(samples.begin(), samples.end());
  const auto b = static_cast<double>(samples.size());
  const auto lo = static_cast<std::size_t>(std::floor(0.025 * b));
  const auto hi = std::min(samples.size() - 1, static_cast<std::size_t>(std::ceil(0.975 * b)) - 1);
  return {samples[lo], samples[hi]};
}

}  // namespace

std::string_view to_string(MetricKind k) {
  switch (k) {
    case MetricKind::kEntityF1: return "entity_f1";
    case MetricKind::kTripleF1: return "triple_f1";
    case MetricKind::kItemF1: return "item_f1";
    case MetricKind::kRougeL: return "rouge_l";
    case MetricKind::kCorpusBleu: return "bleu";
    case MetricKind::kAccuracy: return "accuracy";
    case MetricKind::kTopicTerms: return "topic_terms";
  }
  return "item_f1";
}

MetricKind parse_metric_kind(std::string_view s) {
  for (auto k : {MetricKind::kEntityF1, MetricKind::kTripleF1, MetricKind::kItemF1, MetricKind::kRougeL,
                 MetricKind::kCorpusBleu, MetricKind::kAccuracy, MetricKind::kTopicTerms}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kInvalidEnumValue, "metric \"" + std::string(s) + "\"");
}

std::string metric_display_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEntityF1:
    case MetricKind::kTripleF1:
    case MetricKind::kItemF1: return "F1";
    case MetricKind::kRougeL: return "Rouge";
    case MetricKind::kCorpusBleu: return "BLEU";
    case MetricKind::kAccuracy: return "Accuracy";
    case MetricKind::kTopicTerms: return "Coherence Score";
  }
  return "F1";
}

const std::vector<BenchTask>& benchmark_tasks() {
  static const std::vector<BenchTask> kTasks{
      {"named_entity_recognition", "Sequence Labeling", "Named Entity Recognition", MetricKind::kEntityF1},
      {"relation_extraction", "Sequence Labeling", "Relation Extract", MetricKind::kTripleF1},
      {"abstractive_summarization", "Sequence Labeling", "Abstractive Summarization", MetricKind::kRougeL},
      {"knowledge_linking", "Sequence Labeling", "Knowledge Linking", MetricKind::kItemF1},
      {"topic_modeling", "Sequence Labeling", "Topic Modeling", MetricKind::kTopicTerms},
      {"abstract_to_title", "Generation", "Abstract-to-Title", MetricKind::kRougeL},
      {"machine_translation", "Generation", "Machine Translation", MetricKind::kCorpusBleu},
      {"relationship_predict", "Inference", "Relationship Predict", MetricKind::kAccuracy},
      {"knowledge_fusion", "Inference", "Knowledge Fusion", MetricKind::kItemF1},
      {"semantic_matching", "Inference", "Semantic Matching", MetricKind::kItemF1},
  };
  return kTasks;
}

const BenchTask* find_benchmark_task(std::string_view key) {
  for (const auto& t : benchmark_tasks()) {
    if (t.key == key) return &t;
  }
  return nullptr;
}

EvalConfig eval_config_from_json(const json& j) {
  EvalConfig cfg;
  if (j.is_null()) return cfg;
  try {
    const std::string topic = j.value("topic_mode", std::string("bleu"));
    if (topic == "bleu") {
      cfg.topic_mode = TopicMode::kBleu;
    } else if (topic == "set_f1") {
      cfg.topic_mode = TopicMode::kSetF1;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "metrics.topic_mode must be bleu or set_f1");
    }
    const std::string smoothing = j.value("bleu_smoothing", std::string("add_one"));
    if (smoothing == "add_one") {
      cfg.bleu_smoothing = BleuSmoothing::kAddOne;
    } else if (smoothing == "none") {
      cfg.bleu_smoothing = BleuSmoothing::kNone;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "metrics.bleu_smoothing must be add_one or none");
    }
    if (j.contains("token_mode")) cfg.default_token_mode = parse_token_mode(j.at("token_mode").get<std::string>());
    if (j.contains("overrides")) {
      for (const auto& [task, kind] : j.at("overrides").items()) {
        if (!find_benchmark_task(task)) throw Error(ErrorCode::kUnknownTask, "metrics.overrides: " + task);
        cfg.overrides[task] = parse_metric_kind(kind.get<std::string>());
      }
    }
    cfg.bootstrap_samples = j.value("bootstrap_samples", cfg.bootstrap_samples);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("metrics: ") + e.what());
  }
  return cfg;
}

std::vector<TaskScore> score_predictions(const std::vector<Prediction>& gold, const std::vector<Prediction>& pred,
                                         const EvalConfig& config) {
  std::unordered_map<std::string, const Prediction*> by_id;
  by_id.reserve(pred.size());
  for (const auto& p : pred) {
    if (!by_id.emplace(p.id, &p).second) throw Error(ErrorCode::kDuplicateRecordId, "prediction " + p.id);
  }
  std::unordered_map<std::string_view, int> gold_ids;
  std::map<std::string, std::vector<std::pair<const Prediction*, const Prediction*>>> by_task;
  for (const auto& g : gold) {
    if (!gold_ids.emplace(g.id, 0).second) throw Error(ErrorCode::kDuplicateRecordId, "gold " + g.id);
    if (!find_benchmark_task(g.task)) throw Error(ErrorCode::kUnknownTask, "\"" + g.task + "\" (instance " + g.id + ")");
    auto it = by_id.find(g.id);
    if (it == by_id.end()) throw Error(ErrorCode::kIdMismatch, "no prediction for gold instance " + g.id);
    if (it->second->task != g.task) {
      throw Error(ErrorCode::kIdMismatch,
                  "instance " + g.id + " is " + g.task + " in gold but " + it->second->task + " in predictions");
    }
    by_task[g.task].emplace_back(&g, it->second);
  }
  for (const auto& p : pred) {
    if (!gold_ids.count(p.id)) throw Error(ErrorCode::kIdMismatch, "prediction " + p.id + " has no gold instance");
  }

  std::vector<TaskScore> scores;
  for (const auto& task : benchmark_tasks()) {
    auto it = by_task.find(task.key);
    if (it == by_task.end()) continue;
    const auto ov = config.overrides.find(task.key);
    const MetricKind kind = ov != config.overrides.end() ? ov->second : task.metric;

    std::vector<InstanceStat> stats;
    stats.reserve(it->second.size());
    TaskScore ts;
    ts.task = task.key;
    ts.metric = kind;
    ts.instances = it->second.size();
    for (const auto& [g, p] : it->second) {
      stats.push_back(score_instance(kind, *g, *p, config));
      if (kind == MetricKind::kTopicTerms && (p->items.size() < 3 || p->items.size() > 7)) {
        ++ts.invalid_topic_counts;
      }
    }
    std::vector<std::size_t> all(stats.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    ts.score = aggregate(kind, stats, all, config);
    if (config.bootstrap_samples > 0) ts.interval = bootstrap_interval(kind, stats, config, task.key);
    scores.push_back(std::move(ts));
  }
  return scores;
}

MetricReport run_eval(const std::vector<Prediction>& gold, const std::vector<Prediction>& pred_a,
                      const std::vector<Prediction>* pred_b, const EvalConfig& config) {
  const auto a = score_predictions(gold, pred_a, config);
  std::vector<TaskScore> b;
  if (pred_b) b = score_predictions(gold, *pred_b, config);
  MetricReport report;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const BenchTask* task = find_benchmark_task(a[i].task);
    MetricRow row{task->group, task->dataset, a[i].score, std::nullopt, metric_display_name(a[i].metric)};
    if (pred_b) row.score_b = b[i].score;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace scibench
