#include <doctest.h>

#include <nlohmann/json.hpp>

#include "scibench/eval.hpp"
#include "scibench/report.hpp"
#include "support.hpp"

using namespace scibench;
using scibench::testing::Gen;

namespace {

const std::filesystem::path kFixtures(SCIBENCH_FIXTURES);

// Published score pairs, in table order.
struct Published {
  const char* dataset;
  const char* a;
  const char* b;
};
const Published kPublishedRows[] = {
    {"Named Entity Recognition", "0.8280", "0.5850"}, {"Relation Extract", "0.6670", "0.5560"},
    {"Abstractive Summarization", "0.7670", "0.5420"}, {"Knowledge Linking", "0.6830", "0.4910"},
    {"Topic Modeling", "0.5000", "0.3870"},           {"Abstract-to-Title", "0.7620", "0.5110"},
    {"Machine Translation", "0.7740", "0.6680"},      {"Relationship Predict", "0.5265", "0.3340"},
    {"Knowledge Fusion", "0.5580", "0.4610"},         {"Semantic Matching", "0.6262", "0.5860"},
};

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t i = 1;
  while (i < line.size()) {
    const std::size_t j = line.find('|', i);
    if (j == std::string::npos) break;
    std::string c = line.substr(i, j - i);
    const auto b = c.find_first_not_of(' ');
    const auto e = c.find_last_not_of(' ');
    cells.push_back(b == std::string::npos ? "" : c.substr(b, e - b + 1));
    i = j + 1;
  }
  return cells;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find('\n', i);
    out.push_back(s.substr(i, j - i));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

Prediction pred(std::string id, std::string task) {
  Prediction p;
  p.id = std::move(id);
  p.task = std::move(task);
  return p;
}

}  // namespace

TEST_CASE("published comparison table renders cell for cell") {
  const auto report = load_report((kFixtures / "table2_report.json").string());
  REQUIRE(report.rows.size() == 10);
  const auto md = lines_of(emit_report(report, ReportFormat::kMarkdown));
  REQUIRE(md.size() >= 12);
  CHECK(md[0] == "| Task | Dataset | SciGPT | GPT-4 | Evaluation Metrics |");
  CHECK(md[1] == "|---|---|---:|---:|---|");
  const char* groups[] = {"Sequence Labeling", "", "", "", "", "Generation", "", "Inference", "", ""};
  for (std::size_t i = 0; i < 10; ++i) {
    const auto cells = split_cells(md[i + 2]);
    REQUIRE(cells.size() == 5);
    CHECK(cells[0] == groups[i]);
    CHECK(cells[1] == kPublishedRows[i].dataset);
    CHECK(cells[2] == kPublishedRows[i].a);
    CHECK(cells[3] == kPublishedRows[i].b);
  }
}

TEST_CASE("csv output round-trips") {
  auto report = load_report((kFixtures / "table2_report.json").string());
  report.provenance = {{"seed", "7"}, {"gold", "a,b.jsonl"}};
  report.rows[3].score_b.reset();
  report.rows[0].dataset = "Named \"Entity\", Recognition";
  const std::string csv = emit_report(report, ReportFormat::kCsv);
  CHECK(csv.find("task_group,dataset,SciGPT,GPT-4,metric_name") != std::string::npos);
  const auto back = parse_report_csv(csv);
  CHECK(back.model_a == "SciGPT");
  CHECK(back.model_b == "GPT-4");
  REQUIRE(back.rows.size() == report.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].dataset == report.rows[i].dataset);
    CHECK(back.rows[i].score_a == doctest::Approx(report.rows[i].score_a).epsilon(1e-9));
    CHECK(back.rows[i].score_b.has_value() == report.rows[i].score_b.has_value());
  }
  CHECK(back.provenance == report.provenance);
  CHECK(emit_report(back, ReportFormat::kCsv) == csv);
}

TEST_CASE("report validation") {
  MetricReport empty;
  CHECK_THROWS_AS(emit_report(empty, ReportFormat::kMarkdown), Error);
  MetricReport bad;
  bad.rows.push_back({"Sequence Labeling", "X", 0.5, std::nullopt, "Perplexity"});
  CHECK_THROWS_AS(emit_report(bad, ReportFormat::kMarkdown), Error);
  bad.rows[0] = {"Retrieval", "X", 0.5, std::nullopt, "F1"};
  CHECK_THROWS_AS(emit_report(bad, ReportFormat::kCsv), Error);

  MetricReport single;
  single.rows.push_back({"Inference", "X", 0.12345, std::nullopt, "F1"});
  single.rows.push_back({"Generation", "Y", 1.0, 0.0, "BLEU"});
  const auto md = lines_of(emit_report(single, ReportFormat::kMarkdown));
  // Groups come out in display order regardless of input order.
  CHECK(md[2] == "| Generation | Y | 1.0000 | 0.0000 | BLEU |");
  CHECK(md[3] == "| Inference | X | 0.1235 | - | F1 |");
  CHECK(parse_report_format("csv") == ReportFormat::kCsv);
  CHECK_THROWS_AS(parse_report_format("html"), Error);
}

TEST_CASE("metric registry and task table") {
  CHECK(benchmark_tasks().size() == 10);
  for (const auto& t : benchmark_tasks()) CHECK(is_registered_metric(metric_display_name(t.metric)));
  CHECK(find_benchmark_task("machine_translation")->metric == MetricKind::kCorpusBleu);
  CHECK(find_benchmark_task("poetry") == nullptr);
}

namespace {

// Two instances per benchmark task.
std::vector<Prediction> sample_gold() {
  std::vector<Prediction> g;
  auto ner = pred("n1", "named_entity_recognition");
  ner.entities = {{"graphene", "MAT", 0, 8}, {"oxide", "MAT", 9, 14}};
  g.push_back(ner);
  ner.id = "n2";
  ner.entities = {{"sulfur", "MAT", 0, 6}};
  g.push_back(ner);
  auto re = pred("r1", "relation_extraction");
  re.triples = {{"a", "binds", "b"}, {"c", "binds", "d"}};
  g.push_back(re);
  re.id = "r2";
  re.triples = {{"x", "uses", "y"}};
  g.push_back(re);
  auto sum = pred("s1", "abstractive_summarization");
  sum.text = "membranes improve water permeance";
  g.push_back(sum);
  sum.id = "s2";
  sum.text = "sulfur cathodes lose capacity";
  g.push_back(sum);
  auto kl = pred("k1", "knowledge_linking");
  kl.items = {"graphene", "oxide"};
  g.push_back(kl);
  kl.id = "k2";
  kl.items = {"sulfur"};
  g.push_back(kl);
  auto tm = pred("t1", "topic_modeling");
  tm.items = {"membrane", "water", "salt"};
  g.push_back(tm);
  tm.id = "t2";
  tm.items = {"battery", "sulfur", "cathode", "capacity"};
  g.push_back(tm);
  auto at = pred("a1", "abstract_to_title");
  at.text = "graphene oxide membranes for desalination";
  g.push_back(at);
  at.id = "a2";
  at.text = "\xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF membranes";
  g.push_back(at);
  auto mt = pred("m1", "machine_translation");
  mt.references = {"the membrane rejects salt well", "the membrane rejects most salt"};
  g.push_back(mt);
  mt.id = "m2";
  mt.references = {"sulfur cathodes degrade over many cycles"};
  g.push_back(mt);
  auto rp = pred("p1", "relationship_predict");
  rp.text = "causes";
  g.push_back(rp);
  rp.id = "p2";
  rp.text = "inhibits";
  g.push_back(rp);
  auto kf = pred("f1", "knowledge_fusion");
  kf.items = {"materials", "chemistry"};
  g.push_back(kf);
  kf.id = "f2";
  kf.items = {"energy"};
  g.push_back(kf);
  auto sm = pred("x1", "semantic_matching");
  sm.items = {"porosity", "thickness"};
  g.push_back(sm);
  sm.id = "x2";
  sm.items = {"voltage"};
  g.push_back(sm);
  return g;
}

std::vector<Prediction> sample_pred() {
  auto p = sample_gold();
  p[0].entities = {{"graphene", "MAT", 0, 8}, {"oxide", "PROP", 9, 14}};
  p[1].entities = {};
  p[2].triples = {{"a", "binds", "b"}, {"d", "binds", "c"}, {"e", "binds", "f"}};
  p[4].text = "membranes raise water permeance";
  p[5].text = "capacity fades";
  p[6].items = {"Graphene", "carbon"};
  p[8].items = {"membrane", "salt", "water"};
  p[9].items = {"battery", "sulfur", "cathode", "capacity", "anode", "binder", "cell", "voltage"};
  p[10].text = "graphene membranes for desalination";
  p[11].text = "\xE7\x9F\xB3\xE5\xA2\xA8 membranes";
  p[12].references.clear();
  p[12].text = "the membrane rejects salt";
  p[13].references.clear();
  p[13].text = "sulfur cathodes degrade after cycles";
  p[15].text = "causes";
  p[17].items = {"energy", "physics"};
  p[19].items = {};
  return p;
}

}  // namespace

TEST_CASE("evaluation matches direct metric calls") {
  const auto gold = sample_gold();
  const auto p = sample_pred();
  EvalConfig cfg;
  const auto scores = score_predictions(gold, p, cfg);
  REQUIRE(scores.size() == 10);
  std::map<std::string, double> got;
  for (const auto& s : scores) got[s.task] = s.score;

  auto mixed = [](const std::string& s) { return tokenize(s, TokenMode::kMixed); };
  CHECK(got["named_entity_recognition"] ==
        (ner_strict_f1(p[0].entities, gold[0].entities) + ner_strict_f1(p[1].entities, gold[1].entities)).f1);
  CHECK(got["relation_extraction"] ==
        (re_micro_f1(p[2].triples, gold[2].triples) + re_micro_f1(p[3].triples, gold[3].triples)).f1);
  CHECK(got["abstractive_summarization"] ==
        (rouge_l(mixed(p[4].text), mixed(gold[4].text)) + rouge_l(mixed(p[5].text), mixed(gold[5].text))) / 2.0);
  CHECK(got["knowledge_linking"] == (set_f1(p[6].items, gold[6].items) + set_f1(p[7].items, gold[7].items)).f1);
  CHECK(got["topic_modeling"] == (score_topic_terms(p[8].items, gold[8].items, TopicMode::kBleu).score +
                                  score_topic_terms(p[9].items, gold[9].items, TopicMode::kBleu).score) /
                                     2.0);
  CHECK(got["abstract_to_title"] ==
        (rouge_l(mixed(p[10].text), mixed(gold[10].text)) + rouge_l(mixed(p[11].text), mixed(gold[11].text))) / 2.0);
  BleuStats mt(4);
  for (int i : {12, 13}) {
    std::vector<TokenSequence> refs;
    for (const auto& r : gold[static_cast<std::size_t>(i)].references) refs.push_back(mixed(r));
    mt += bleu_stats(mixed(p[static_cast<std::size_t>(i)].text), refs, 4);
  }
  CHECK(got["machine_translation"] == mt.score(BleuSmoothing::kAddOne));
  CHECK(got["relationship_predict"] == accuracy({p[14].text, p[15].text}, {gold[14].text, gold[15].text}));
  CHECK(got["relationship_predict"] == 0.5);
  CHECK(got["knowledge_fusion"] == (set_f1(p[16].items, gold[16].items) + set_f1(p[17].items, gold[17].items)).f1);
  CHECK(got["semantic_matching"] == (set_f1(p[18].items, gold[18].items) + set_f1(p[19].items, gold[19].items)).f1);

  for (const auto& s : scores) {
    if (s.task == "topic_modeling") CHECK(s.invalid_topic_counts == 1);
  }
}

TEST_CASE("identical predictions score one on every task") {
  auto gold = sample_gold();
  auto same = gold;
  // Translation predictions carry their text; use the first reference.
  for (auto& g : same) {
    if (g.task == "machine_translation") {
      g.text = g.references.front();
      g.references.clear();
    }
  }
  for (auto mode : {TopicMode::kBleu, TopicMode::kSetF1}) {
    EvalConfig cfg;
    cfg.topic_mode = mode;
    for (const auto& s : score_predictions(gold, same, cfg)) {
      INFO(s.task);
      CHECK(s.score == 1.0);
    }
  }
  const auto report = run_eval(gold, same, &same, EvalConfig{});
  REQUIRE(report.rows.size() == 10);
  for (const auto& r : report.rows) {
    CHECK(r.score_a == 1.0);
    CHECK(r.score_b == 1.0);
  }
}

TEST_CASE("id and task mismatches are errors") {
  const auto gold = sample_gold();
  auto p = gold;
  p.pop_back();
  CHECK_THROWS_AS(score_predictions(gold, p, {}), Error);
  p = gold;
  p[0].task = "relation_extraction";
  CHECK_THROWS_AS(score_predictions(gold, p, {}), Error);
  p = gold;
  p.push_back(p[0]);
  CHECK_THROWS_AS(score_predictions(gold, p, {}), Error);
  auto g2 = gold;
  g2[0].task = "poetry";
  try {
    score_predictions(g2, gold, {});
    FAIL("expected kUnknownTask");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownTask);
  }
}

TEST_CASE("bootstrap interval brackets the point estimate and is seeded") {
  Gen g(61);
  std::vector<Prediction> gold;
  std::vector<Prediction> p;
  for (int i = 0; i < 50; ++i) {
    auto x = pred("i" + std::to_string(i), "relationship_predict");
    x.text = g.word(1, 3);
    gold.push_back(x);
    x.text = g.word(1, 3);
    p.push_back(x);
  }
  EvalConfig cfg;
  cfg.bootstrap_samples = 400;
  cfg.seed = 9;
  const auto a = score_predictions(gold, p, cfg);
  const auto b = score_predictions(gold, p, cfg);
  REQUIRE(a[0].interval.has_value());
  CHECK(a[0].interval == b[0].interval);
  CHECK(a[0].interval->first <= a[0].score);
  CHECK(a[0].score <= a[0].interval->second);
}

TEST_CASE("eval config parsing") {
  const auto cfg = eval_config_from_json(nlohmann::json::parse(
      R"({"topic_mode": "set_f1", "bleu_smoothing": "none", "token_mode": "latin", "overrides": {"abstract_to_title": "bleu"}})"));
  CHECK(cfg.topic_mode == TopicMode::kSetF1);
  CHECK(cfg.bleu_smoothing == BleuSmoothing::kNone);
  CHECK(cfg.default_token_mode == TokenMode::kLatin);
  CHECK(cfg.overrides.at("abstract_to_title") == MetricKind::kCorpusBleu);
  CHECK_THROWS_AS(eval_config_from_json(nlohmann::json::parse(R"({"topic_mode": "coherence"})")), Error);
  CHECK_THROWS_AS(eval_config_from_json(nlohmann::json::parse(R"({"overrides": {"poetry": "bleu"}})")), Error);
}
