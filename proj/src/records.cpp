#include "scibench/records.hpp"

#include <array>
#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_set>
#include <utility>

#include "scibench/io.hpp"

namespace scibench {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

template <class E, std::size_t N>
using EnumTable = std::array<std::pair<E, std::string_view>, N>;

constexpr EnumTable<Source, 4> kSources{{
    {Source::kAcademicPaper, "academic_paper"},
    {Source::kPatent, "patent"},
    {Source::kSynthetic, "synthetic"},
    {Source::kGeneral, "general"},
}};

constexpr EnumTable<Domain, 3> kDomains{{
    {Domain::kPatent, "patent"},
    {Domain::kSciencePaper, "science_paper"},
    {Domain::kGeneral, "general"},
}};

constexpr EnumTable<Language, 2> kLanguages{{{Language::kEn, "en"}, {Language::kZh, "zh"}}};

constexpr EnumTable<PreferenceSource, 2> kPreferenceSources{
    {{PreferenceSource::kHuman, "human"}, {PreferenceSource::kAi, "ai"}}};

constexpr EnumTable<TokenMode, 3> kTokenModes{
    {{TokenMode::kLatin, "latin"}, {TokenMode::kCjk, "cjk"}, {TokenMode::kMixed, "mixed"}}};

constexpr EnumTable<LanguageTag, 3> kLanguageTags{
    {{LanguageTag::kEn, "en"}, {LanguageTag::kZh, "zh"}, {LanguageTag::kMixed, "mixed"}}};

constexpr EnumTable<TaskType, kTaskTypeCount> kTasks{{
    {TaskType::kNamedEntityRecognition, "named_entity_recognition"},
    {TaskType::kAbstractToTitle, "abstract_to_title"},
    {TaskType::kMachineTranslation, "machine_translation"},
    {TaskType::kRelationExtraction, "relation_extraction"},
    {TaskType::kKnowledgeLinking, "knowledge_linking"},
    {TaskType::kKnowledgeFusion, "knowledge_fusion"},
    {TaskType::kRelationshipComplete, "relationship_complete"},
    {TaskType::kTopicModeling, "topic_modeling"},
    {TaskType::kSemanticMatching, "semantic_matching"},
    {TaskType::kSummaryToTitle, "summary_to_title"},
    {TaskType::kSummaryToTopic, "summary_to_topic"},
    {TaskType::kTitleToKeywords, "title_to_keywords"},
    {TaskType::kTopicAndSummaryToTitle, "topic_and_summary_to_title"},
    {TaskType::kAbstractExtract, "abstract_extract"},
    {TaskType::kRelationPredict, "relation_predict"},
    {TaskType::kKnowledgeExtract, "knowledge_extract"},
    {TaskType::kGeneralDialogue, "general_dialogue"},
    {TaskType::kOther, "other"},
}};

template <class E, std::size_t N>
std::string_view name_of(const EnumTable<E, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

template <class E, std::size_t N>
E value_of(const EnumTable<E, N>& table, std::string_view s, std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorCode::kInvalidEnumValue, std::string(what) + "=\"" + std::string(s) + "\"");
}

// Field accessors over a parsed JSON object.

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "record is not a JSON object");
  return j;
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string get_string(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) throw Error(ErrorCode::kMissingRequiredField, key);
  if (!v->is_string()) throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " must be a string");
  return v->get<std::string>();
}

std::string get_nonempty_string(const json& j, const char* key) {
  std::string s = get_string(j, key);
  if (s.empty()) throw Error(ErrorCode::kMissingRequiredField, std::string(key) + " (empty)");
  return s;
}

std::optional<std::string> get_optional_string(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " must be a string");
  return v->get<std::string>();
}

double get_number(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) throw Error(ErrorCode::kMissingRequiredField, key);
  if (!v->is_number()) throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " must be a number");
  return v->get<double>();
}

std::optional<double> get_optional_number(const json& j, const char* key) {
  if (!find(j, key)) return std::nullopt;
  return get_number(j, key);
}

std::size_t get_index(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v) throw Error(ErrorCode::kMissingRequiredField, key);
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
    throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " must be a nonnegative integer");
  }
  return v->get<std::size_t>();
}

std::vector<std::string> get_string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  const json* v = find(j, key);
  if (!v) return out;
  if (!v->is_array()) throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " must be an array");
  for (const auto& e : *v) {
    if (!e.is_string()) throw Error(ErrorCode::kInvalidFieldValue, std::string(key) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Document document_from(const json& j) {
  Document d;
  d.id = get_nonempty_string(j, "id");
  d.body = get_string(j, "body");
  d.title = get_optional_string(j, "title").value_or("");
  d.abstract_text = get_optional_string(j, "abstract").value_or("");
  d.doi = get_optional_string(j, "doi");
  if (auto s = get_optional_string(j, "source")) d.source = parse_source(*s);
  if (auto l = get_optional_string(j, "language")) {
    d.language = parse_language_tag(*l);
  } else {
    d.language = text::detect_language(d.body);
  }
  return d;
}

InstructionPair instruction_pair_from(const json& j) {
  InstructionPair p;
  p.id = get_nonempty_string(j, "id");
  p.instruction = get_nonempty_string(j, "instruction");
  p.response = get_string(j, "response");
  p.domain = parse_domain(get_string(j, "domain"));
  p.task = parse_task_type(get_string(j, "task"));
  p.language = parse_language(get_string(j, "language"));
  if (auto o = get_optional_string(j, "origin")) p.origin = parse_source(*o);
  p.doc_id = get_optional_string(j, "doc_id");
  return p;
}

PreferencePair preference_pair_from(const json& j) {
  PreferencePair p;
  p.prompt_id = get_nonempty_string(j, "prompt_id");
  p.x = get_string(j, "x");
  p.y_w = get_string(j, "y_w");
  p.y_l = get_string(j, "y_l");
  p.source = parse_preference_source(get_string(j, "source"));
  return p;
}

Prediction prediction_from(const json& j) {
  Prediction p;
  p.id = get_nonempty_string(j, "id");
  p.task = get_nonempty_string(j, "task");
  if (auto l = get_optional_string(j, "lang")) p.lang = parse_token_mode(*l);
  p.text = get_optional_string(j, "text").value_or("");
  p.references = get_string_list(j, "references");
  p.items = get_string_list(j, "items");
  if (const json* ents = find(j, "entities")) {
    if (!ents->is_array()) throw Error(ErrorCode::kInvalidFieldValue, "entities must be an array");
    for (const auto& e : *ents) {
      if (!e.is_object()) throw Error(ErrorCode::kInvalidFieldValue, "entity must be an object");
      EntityMention m;
      m.surface = get_string(e, "surface");
      m.entity_type = get_string(e, "type");
      m.start = get_index(e, "start");
      m.end = get_index(e, "end");
      if (m.start >= m.end) throw Error(ErrorCode::kInvalidFieldValue, "entity span must satisfy start < end");
      p.entities.push_back(std::move(m));
    }
  }
  if (const json* triples = find(j, "triples")) {
    if (!triples->is_array()) throw Error(ErrorCode::kInvalidFieldValue, "triples must be an array");
    for (const auto& t : *triples) {
      if (!t.is_object()) throw Error(ErrorCode::kInvalidFieldValue, "triple must be an object");
      p.triples.push_back({get_string(t, "head"), get_string(t, "relation"), get_string(t, "tail")});
    }
  }
  return p;
}

LogProbRecord logprob_from(const json& j) {
  LogProbRecord r;
  r.id = get_nonempty_string(j, "id");
  r.logp_w = get_number(j, "logp_w");
  r.logp_l = get_number(j, "logp_l");
  r.ref_logp_w = get_optional_number(j, "ref_logp_w");
  r.ref_logp_l = get_optional_number(j, "ref_logp_l");
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v > 0.0) {
      throw Error(ErrorCode::kInvalidFieldValue, std::string(name) + " must be a finite log-probability <= 0");
    }
  };
  check(r.logp_w, "logp_w");
  check(r.logp_l, "logp_l");
  if (r.ref_logp_w) check(*r.ref_logp_w, "ref_logp_w");
  if (r.ref_logp_l) check(*r.ref_logp_l, "ref_logp_l");
  return r;
}

JudgeItem judge_item_from(const json& j) {
  JudgeItem r;
  r.question_id = get_nonempty_string(j, "question_id");
  r.question = get_string(j, "question");
  r.answer_a = get_string(j, "answer_a");
  r.answer_b = get_string(j, "answer_b");
  return r;
}

std::string dump(const ojson& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

}  // namespace

std::string_view to_string(Source v) { return name_of(kSources, v); }
std::string_view to_string(Domain v) { return name_of(kDomains, v); }
std::string_view to_string(Language v) { return name_of(kLanguages, v); }
std::string_view to_string(PreferenceSource v) { return name_of(kPreferenceSources, v); }
std::string_view to_string(TokenMode v) { return name_of(kTokenModes, v); }
std::string_view to_string(TaskType v) { return name_of(kTasks, v); }
std::string_view to_string(LanguageTag v) { return name_of(kLanguageTags, v); }

Source parse_source(std::string_view s) { return value_of(kSources, s, "source"); }
Domain parse_domain(std::string_view s) { return value_of(kDomains, s, "domain"); }
Language parse_language(std::string_view s) { return value_of(kLanguages, s, "language"); }
PreferenceSource parse_preference_source(std::string_view s) {
  return value_of(kPreferenceSources, s, "source");
}
TokenMode parse_token_mode(std::string_view s) { return value_of(kTokenModes, s, "lang"); }
TaskType parse_task_type(std::string_view s) { return value_of(kTasks, s, "task"); }
LanguageTag parse_language_tag(std::string_view s) { return value_of(kLanguageTags, s, "language"); }

const std::vector<TaskType>& all_task_types() {
  static const std::vector<TaskType> all = [] {
    std::vector<TaskType> v;
    for (const auto& [value, name] : kTasks) v.push_back(value);
    return v;
  }();
  return all;
}

Source InstructionPair::effective_origin() const {
  if (origin) return *origin;
  switch (domain) {
    case Domain::kPatent: return Source::kPatent;
    case Domain::kSciencePaper: return Source::kAcademicPaper;
    case Domain::kGeneral: return Source::kGeneral;
  }
  return Source::kGeneral;
}

Record parse_record(std::string_view line, RecordSchema schema) {
  const json j = parse_object(line);
  switch (schema) {
    case RecordSchema::kDocument: return document_from(j);
    case RecordSchema::kInstructionPair: return instruction_pair_from(j);
    case RecordSchema::kPreferencePair: return preference_pair_from(j);
    case RecordSchema::kPrediction: return prediction_from(j);
    case RecordSchema::kLogProbs: return logprob_from(j);
    case RecordSchema::kJudgeItem: return judge_item_from(j);
  }
  throw Error(ErrorCode::kMalformedRecord, "unknown schema");
}

template <class T>
constexpr RecordSchema schema_of();
template <>
constexpr RecordSchema schema_of<Document>() { return RecordSchema::kDocument; }
template <>
constexpr RecordSchema schema_of<InstructionPair>() { return RecordSchema::kInstructionPair; }
template <>
constexpr RecordSchema schema_of<PreferencePair>() { return RecordSchema::kPreferencePair; }
template <>
constexpr RecordSchema schema_of<Prediction>() { return RecordSchema::kPrediction; }
template <>
constexpr RecordSchema schema_of<LogProbRecord>() { return RecordSchema::kLogProbs; }
template <>
constexpr RecordSchema schema_of<JudgeItem>() { return RecordSchema::kJudgeItem; }

template <class T>
T parse_record_as(std::string_view line) {
  return std::get<T>(parse_record(line, schema_of<T>()));
}

template <class T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::vector<T> out;
  io::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty() || line.front() == '#') return;
    try {
      out.push_back(parse_record_as<T>(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(n) + ": " + e.detail());
    }
  });
  return out;
}

#define SCIBENCH_INSTANTIATE(T)                           \
  template T parse_record_as<T>(std::string_view line); \
  template std::vector<T> read_records<T>(const std::filesystem::path& path);
SCIBENCH_INSTANTIATE(Document)
SCIBENCH_INSTANTIATE(InstructionPair)
SCIBENCH_INSTANTIATE(PreferencePair)
SCIBENCH_INSTANTIATE(Prediction)
SCIBENCH_INSTANTIATE(LogProbRecord)
SCIBENCH_INSTANTIATE(JudgeItem)
#undef SCIBENCH_INSTANTIATE

std::string to_line(const Document& r) {
  ojson j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["abstract"] = r.abstract_text;
  j["body"] = r.body;
  j["language"] = to_string(r.language);
  if (r.doi) j["doi"] = *r.doi;
  j["source"] = to_string(r.source);
  return dump(j);
}

std::string to_line(const InstructionPair& r) {
  ojson j;
  j["id"] = r.id;
  j["instruction"] = r.instruction;
  j["response"] = r.response;
  j["domain"] = to_string(r.domain);
  j["task"] = to_string(r.task);
  j["language"] = to_string(r.language);
  if (r.origin) j["origin"] = to_string(*r.origin);
  if (r.doc_id) j["doc_id"] = *r.doc_id;
  return dump(j);
}

std::string to_line(const PreferencePair& r) {
  ojson j;
  j["prompt_id"] = r.prompt_id;
  j["x"] = r.x;
  j["y_w"] = r.y_w;
  j["y_l"] = r.y_l;
  j["source"] = to_string(r.source);
  return dump(j);
}

std::string to_line(const Prediction& r) {
  ojson j;
  j["id"] = r.id;
  j["task"] = r.task;
  if (r.lang) j["lang"] = to_string(*r.lang);
  if (!r.text.empty()) j["text"] = r.text;
  if (!r.references.empty()) j["references"] = r.references;
  if (!r.entities.empty()) {
    ojson ents = ojson::array();
    for (const auto& e : r.entities) {
      ents.push_back({{"surface", e.surface}, {"type", e.entity_type}, {"start", e.start}, {"end", e.end}});
    }
    j["entities"] = std::move(ents);
  }
  if (!r.triples.empty()) {
    ojson triples = ojson::array();
    for (const auto& t : r.triples) {
      triples.push_back({{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
    }
    j["triples"] = std::move(triples);
  }
  if (!r.items.empty()) j["items"] = r.items;
  return dump(j);
}

std::string to_line(const LogProbRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["logp_w"] = r.logp_w;
  j["logp_l"] = r.logp_l;
  if (r.ref_logp_w) j["ref_logp_w"] = *r.ref_logp_w;
  if (r.ref_logp_l) j["ref_logp_l"] = *r.ref_logp_l;
  return dump(j);
}

std::string to_line(const JudgeItem& r) {
  ojson j;
  j["question_id"] = r.question_id;
  j["question"] = r.question;
  j["answer_a"] = r.answer_a;
  j["answer_b"] = r.answer_b;
  return dump(j);
}

std::string to_line(const Record& r) {
  return std::visit([](const auto& v) { return to_line(v); }, r);
}

void check_unique_ids(const std::vector<Document>& docs) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(docs.size());
  for (const auto& d : docs) {
    if (!seen.insert(d.id).second) throw Error(ErrorCode::kDuplicateRecordId, d.id);
  }
}

}  // namespace scibench
