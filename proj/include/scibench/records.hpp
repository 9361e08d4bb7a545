#pragma once

// Domain records and their line-delimited JSON encoding. Field names are
// normative; see docs/record_format.md.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scibench/error.hpp"
#include "scibench/text.hpp"

namespace scibench {

using text::LanguageTag;

enum class Source { kAcademicPaper, kPatent, kSynthetic, kGeneral };
enum class Domain { kPatent, kSciencePaper, kGeneral };
enum class Language { kEn, kZh };
enum class PreferenceSource { kHuman, kAi };
enum class TokenMode { kLatin, kCjk, kMixed };

enum class TaskType {
  kNamedEntityRecognition,
  kAbstractToTitle,
  kMachineTranslation,
  kRelationExtraction,
  kKnowledgeLinking,
  kKnowledgeFusion,
  kRelationshipComplete,
  kTopicModeling,
  kSemanticMatching,
  kSummaryToTitle,
  kSummaryToTopic,
  kTitleToKeywords,
  kTopicAndSummaryToTitle,
  kAbstractExtract,
  kRelationPredict,
  kKnowledgeExtract,
  kGeneralDialogue,
  kOther,
};

inline constexpr std::size_t kTaskTypeCount = 18;

std::string_view to_string(Source v);
std::string_view to_string(Domain v);
std::string_view to_string(Language v);
std::string_view to_string(PreferenceSource v);
std::string_view to_string(TokenMode v);
std::string_view to_string(TaskType v);
std::string_view to_string(LanguageTag v);

// All parse_* helpers throw Error(kInvalidEnumValue) naming the bad value.
Source parse_source(std::string_view s);
Domain parse_domain(std::string_view s);
Language parse_language(std::string_view s);
PreferenceSource parse_preference_source(std::string_view s);
TokenMode parse_token_mode(std::string_view s);
TaskType parse_task_type(std::string_view s);
LanguageTag parse_language_tag(std::string_view s);

const std::vector<TaskType>& all_task_types();

struct Document {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::string body;
  LanguageTag language = LanguageTag::kEn;
  std::optional<std::string> doi;
  Source source = Source::kGeneral;

  bool operator==(const Document&) const = default;
};

struct InstructionPair {
  std::string id;
  std::string instruction;
  std::string response;
  Domain domain = Domain::kGeneral;
  TaskType task = TaskType::kOther;
  Language language = Language::kEn;
  // Provenance used by the quality prior; defaults from the domain when absent.
  std::optional<Source> origin;
  // Links the pair to the corpus document it was derived from, if any.
  std::optional<std::string> doc_id;

  Source effective_origin() const;
  bool operator==(const InstructionPair&) const = default;
};

struct PreferencePair {
  std::string prompt_id;
  std::string x;
  std::string y_w;
  std::string y_l;
  PreferenceSource source = PreferenceSource::kHuman;

  bool operator==(const PreferencePair&) const = default;
};

struct EntityMention {
  std::string surface;
  std::string entity_type;
  std::size_t start = 0;  // character offsets, end exclusive
  std::size_t end = 0;

  bool operator==(const EntityMention&) const = default;
  auto operator<=>(const EntityMention&) const = default;
};

struct RelationTriple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const RelationTriple&) const = default;
  auto operator<=>(const RelationTriple&) const = default;
};

/// One benchmark instance, either a model prediction or the gold answer.
/// Which payload fields are meaningful depends on `task`.
struct Prediction {
  std::string id;
  std::string task;
  std::optional<TokenMode> lang;
  std::string text;
  std::vector<std::string> references;
  std::vector<EntityMention> entities;
  std::vector<RelationTriple> triples;
  std::vector<std::string> items;

  bool operator==(const Prediction&) const = default;
};

/// Policy log-probabilities of one preference pair, optionally with the
/// reference model's log-probabilities.
struct LogProbRecord {
  std::string id;
  double logp_w = 0.0;
  double logp_l = 0.0;
  std::optional<double> ref_logp_w;
  std::optional<double> ref_logp_l;

  bool operator==(const LogProbRecord&) const = default;
};

struct JudgeItem {
  std::string question_id;
  std::string question;
  std::string answer_a;
  std::string answer_b;

  bool operator==(const JudgeItem&) const = default;
};

enum class RecordSchema {
  kDocument,
  kInstructionPair,
  kPreferencePair,
  kPrediction,
  kLogProbs,
  kJudgeItem,
};

using Record =
    std::variant<Document, InstructionPair, PreferencePair, Prediction, LogProbRecord, JudgeItem>;

/// Parses one line. Unknown fields are ignored.
/// Throws kMalformedRecord, kMissingRequiredField, kInvalidEnumValue or
/// kInvalidFieldValue.
Record parse_record(std::string_view line, RecordSchema schema);

template <class T>
T parse_record_as(std::string_view line);

std::string to_line(const Document& r);
std::string to_line(const InstructionPair& r);
std::string to_line(const PreferencePair& r);
std::string to_line(const Prediction& r);
std::string to_line(const LogProbRecord& r);
std::string to_line(const JudgeItem& r);
std::string to_line(const Record& r);

/// Reads a record file. Blank lines and lines starting with '#' are skipped.
/// Errors are rethrown with "<path>:<line>" prefixed to the detail.
template <class T>
std::vector<T> read_records(const std::filesystem::path& path);

/// Rejects a corpus whose ids are not unique (kDuplicateRecordId).
void check_unique_ids(const std::vector<Document>& docs);

}  // namespace scibench
