#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scibench/io.hpp"
#include "scibench/manifest.hpp"
#include "scibench/metrics.hpp"
#include "scibench/records.hpp"
#include "scibench/text.hpp"
#include "support.hpp"

using namespace scibench;
using scibench::testing::Gen;
using scibench::testing::TempDir;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("utf8 decoding round-trips and replaces malformed bytes") {
  const std::string s = "a\xC3\xA9\xE7\x9F\xB3\xF0\x9F\x98\x80";
  const auto cps = text::decode_utf8(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == U'é');
  CHECK(cps[2] == U'石');
  CHECK(cps[3] == U'\U0001F600');
  std::string back;
  for (char32_t c : cps) text::append_utf8(back, c);
  CHECK(back == s);
  CHECK(text::is_valid_utf8(s));

  const std::string bad = "x\xFFy";
  CHECK_FALSE(text::is_valid_utf8(bad));
  const auto bad_cps = text::decode_utf8(bad);
  REQUIRE(bad_cps.size() == 3);
  CHECK(bad_cps[1] == text::kReplacementChar);
}

TEST_CASE("whitespace collapse and case folding") {
  CHECK(text::collapse_whitespace("  a \t\n b  c ") == "a b c");
  CHECK(text::collapse_whitespace("\xE3\x80\x80x\xE3\x80\x80") == "x");
  CHECK(text::fold_case("GrAphENE") == "graphene");
  CHECK(text::fold_case("\xCE\x94") == "\xCE\xB4");  // Greek capital delta
}

TEST_CASE("language detection uses the dominant script fraction") {
  CHECK(text::detect_language("graphene oxide membranes") == text::LanguageTag::kEn);
  CHECK(text::detect_language("\xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF") == text::LanguageTag::kZh);
  // 3 Han letters vs 3 Latin letters: neither reaches 0.7.
  CHECK(text::detect_language("abc \xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF") == text::LanguageTag::kMixed);
  CHECK(text::count_scripts("12 ,.").letters() == 0);
  CHECK(text::count_scripts("12 ,.").dominant_fraction() == 0.0);
}

TEST_CASE("tokenizer splits on punctuation and Han characters") {
  CHECK(tokenize("Hello, World", TokenMode::kLatin).tokens == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("\xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF device", TokenMode::kCjk).tokens ==
        std::vector<std::string>{"\xE7\x9F\xB3", "\xE5\xA2\xA8", "\xE7\x83\xAF", "device"});
  CHECK(tokenize("\xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF device", TokenMode::kLatin).tokens.size() == 2);
}

TEST_CASE("tokenizer conserves letters on random mixed text") {
  // Oracle: every Latin letter and Han character lands in exactly one token.
  Gen g(11);
  const std::vector<std::string> pieces{"a", "B", "z", " ", ",", "\xE7\x9F\xB3", "\xE5\xA2\xA8", "-", "\t", "7"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const std::size_t n = g.range(0, 30);
    for (std::size_t i = 0; i < n; ++i) s += g.pick(pieces);
    std::size_t han = 0;
    std::size_t latin = 0;
    for (char32_t c : text::decode_utf8(s)) {
      if (text::is_han(c)) ++han;
      if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) ++latin;
    }
    std::size_t tok_han = 0;
    std::size_t tok_latin = 0;
    for (const auto& t : tokenize(s, TokenMode::kMixed).tokens) {
      const auto cps = text::decode_utf8(t);
      REQUIRE_FALSE(cps.empty());
      for (char32_t c : cps) {
        if (text::is_han(c)) {
          ++tok_han;
          CHECK(cps.size() == 1);
        }
        if (c >= U'a' && c <= U'z') ++tok_latin;
      }
    }
    CHECK(tok_han == han);
    CHECK(tok_latin == latin);
  }
}

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("records round-trip through their line encoding") {
  Document d;
  d.id = "d1";
  d.title = "T";
  d.abstract_text = "A";
  d.body = "body \"quoted\" \xE7\x9F\xB3";
  d.language = LanguageTag::kMixed;
  d.doi = "10.1000/x";
  d.source = Source::kPatent;
  CHECK(std::get<Document>(parse_record(to_line(d), RecordSchema::kDocument)) == d);

  InstructionPair p;
  p.id = "p1";
  p.instruction = "do";
  p.response = "done";
  p.domain = Domain::kSciencePaper;
  p.task = TaskType::kMachineTranslation;
  p.language = Language::kZh;
  p.origin = Source::kSynthetic;
  p.doc_id = "d1";
  CHECK(parse_record_as<InstructionPair>(to_line(p)) == p);

  Prediction pr;
  pr.id = "x";
  pr.task = "named_entity_recognition";
  pr.lang = TokenMode::kCjk;
  pr.text = "t";
  pr.references = {"r1", "r2"};
  pr.entities = {{"Graphene", "MAT", 0, 8}};
  pr.triples = {{"h", "r", "t"}};
  pr.items = {"i"};
  CHECK(parse_record_as<Prediction>(to_line(pr)) == pr);

  LogProbRecord lp{"l", -1.5, -2.0, -1.0, std::nullopt};
  CHECK(parse_record_as<LogProbRecord>(to_line(lp)) == lp);

  PreferencePair pp{"q", "x", "w", "l", PreferenceSource::kAi};
  CHECK(parse_record_as<PreferencePair>(to_line(pp)) == pp);

  JudgeItem ji{"q1", "why?", "a", "b"};
  CHECK(parse_record_as<JudgeItem>(to_line(ji)) == ji);
}

TEST_CASE("record parse errors carry codes") {
  CHECK(code_of([] { parse_record("{not json", RecordSchema::kDocument); }) == ErrorCode::kMalformedRecord);
  CHECK(code_of([] { parse_record(R"({"body": "x"})", RecordSchema::kDocument); }) ==
        ErrorCode::kMissingRequiredField);
  CHECK(code_of([] { parse_record(R"({"id": "a", "body": "x", "source": "blog"})", RecordSchema::kDocument); }) ==
        ErrorCode::kInvalidEnumValue);
  CHECK(code_of([] { parse_task_type("poetry"); }) == ErrorCode::kInvalidEnumValue);
}

TEST_CASE("a document without a language tag gets one detected") {
  const auto d = parse_record_as<Document>(R"({"id": "a", "body": "石墨烯"})");
  CHECK(d.language == LanguageTag::kZh);
  CHECK_FALSE(d.doi.has_value());
  CHECK(d.abstract_text.empty());
}

TEST_CASE("record files skip comments and blank lines and report line numbers") {
  TempDir dir("records");
  dir.write("docs.jsonl", "# header\n\n{\"id\": \"a\", \"body\": \"x\"}\n{\"id\": \"b\"}\n");
  try {
    read_records<Document>(dir / "docs.jsonl");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingRequiredField);
    CHECK(e.detail().find("docs.jsonl:4") != std::string::npos);
  }
  dir.write("ok.jsonl", "# header\n{\"id\": \"a\", \"body\": \"x\"}\n\n{\"id\": \"b\", \"body\": \"y\"}\n");
  const auto docs = read_records<Document>(dir / "ok.jsonl");
  REQUIRE(docs.size() == 2);
  CHECK(docs[1].id == "b");

  std::vector<Document> dup(2);
  dup[0].id = dup[1].id = "same";
  CHECK(code_of([&] { check_unique_ids(dup); }) == ErrorCode::kDuplicateRecordId);
  CHECK(code_of([&] { read_records<Document>(dir / "missing.jsonl"); }) == ErrorCode::kIoError);
}

TEST_CASE("every task type name parses back") {
  CHECK(all_task_types().size() == kTaskTypeCount);
  for (TaskType t : all_task_types()) CHECK(parse_task_type(to_string(t)) == t);
}

TEST_CASE("manifest validator on a hand-made manifest") {
  DatasetManifest m;
  m.rows = {{"a", "t1", "en", 30}, {"a", "t1", "zh", 20}, {"b", "t2", std::nullopt, 50}};
  m.declared_total = 100;
  m.declared_proportions = {{"a", 0.5}, {"b", 0.5}};
  auto r = validate_manifest(m, 0.01);
  CHECK(r.computed_total == 100);
  CHECK(r.find("total")->status == CheckStatus::kPass);
  CHECK(r.find("total_multilingual_counted_once")->status == CheckStatus::kWarn);
  CHECK(r.find("proportion:a")->status == CheckStatus::kPass);
  CHECK_FALSE(r.has_failures());

  m.declared_total = 90;
  m.declared_proportions = {{"a", 0.6}, {"b", 0.4}};
  r = validate_manifest(m, 0.01);
  CHECK(r.find("total")->status == CheckStatus::kFail);
  CHECK(r.find("proportion:a")->status == CheckStatus::kWarn);
  CHECK(validate_manifest(m, 0.2).find("proportion:a")->status == CheckStatus::kPass);

  m.rows.push_back({"b", "t3", std::nullopt, -1});
  CHECK(validate_manifest(m, 0.01).find("counts_nonnegative")->status == CheckStatus::kFail);
}

TEST_CASE("manifest validator on the published dataset table") {
  const auto m = load_manifest(std::filesystem::path(SCIBENCH_FIXTURES) / "table1_manifest.json");
  const auto r = validate_manifest(m, 0.01);
  CHECK(r.computed_total == 1070962);
  CHECK(m.declared_total == 796981);
  CHECK(r.find("total")->status == CheckStatus::kFail);
  CHECK(r.has_failures());

  // Independent per-domain sums straight from the rows.
  std::map<std::string, std::int64_t> per_domain;
  std::int64_t total = 0;
  for (const auto& row : m.rows) {
    per_domain[row.domain] += row.count;
    total += row.count;
  }
  CHECK(total == 1070962);
  CHECK(per_domain["patent"] == 385578);
  CHECK(per_domain["science_paper"] == 195293);
  CHECK(per_domain["general"] == 490091);
  for (const auto& [domain, n] : per_domain) {
    CHECK(r.computed_proportions.at(domain) == doctest::Approx(static_cast<double>(n) / total).epsilon(1e-12));
  }
  CHECK(r.find("total_multilingual_counted_once")->detail.find("904330") != std::string::npos);
  const std::string rendered = render_report(r);
  CHECK(rendered.find("1070962") != std::string::npos);
  CHECK(rendered.find("796981") != std::string::npos);
}

TEST_CASE("category distribution") {
  std::vector<InstructionPair> pairs(4);
  pairs[0].domain = pairs[1].domain = Domain::kPatent;
  pairs[2].domain = Domain::kGeneral;
  pairs[3].domain = Domain::kSciencePaper;
  const auto d = category_distribution(pairs);
  CHECK(d.at(Domain::kPatent) == 0.5);
  CHECK(d.at(Domain::kGeneral) == 0.25);
  CHECK(category_distribution({}).empty());
}
