#pragma once

// Hybrid filtering: rule filters, PII redaction, metadata validation and the
// external classifier hook. Documents pass through these in that order.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scibench/http_client.hpp"
#include "scibench/records.hpp"

namespace scibench {

/// Ordered set of named, compiled regular expressions (Perl syntax).
class PiiPatterns {
 public:
  PiiPatterns();  // empty set
  ~PiiPatterns();
  PiiPatterns(const PiiPatterns&);
  PiiPatterns& operator=(const PiiPatterns&);
  PiiPatterns(PiiPatterns&&) noexcept;
  PiiPatterns& operator=(PiiPatterns&&) noexcept;

  /// email, id_number, phone (applied in that order).
  static PiiPatterns defaults();
  /// Throws Error(kInvalidPattern) naming the first pattern that fails.
  static PiiPatterns compile(const std::vector<std::pair<std::string, std::string>>& named);

  std::size_t size() const;
  const std::string& name(std::size_t i) const;
  const std::string& source(std::string_view name) const;

 private:
  friend struct PiiScrubber;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ScrubResult {
  std::string text;
  std::map<std::string, std::size_t> redactions;  // every pattern name, zero included
  std::size_t matched_bytes = 0;                   // total length of the replaced spans
};

/// Replaces every match with "[" + upper-cased pattern name + "]".
/// Patterns run sequentially over the progressively scrubbed text.
ScrubResult scrub_pii(std::string_view input, const PiiPatterns& patterns);

struct RequiredMetadata {
  bool abstract_nonempty = true;
  bool doi_valid = false;
};

struct FilterConfig {
  std::vector<std::string> keyword_blacklist;
  double language_threshold = 0.7;
  PiiPatterns pii_patterns = PiiPatterns::defaults();
  RequiredMetadata required_metadata;
};

/// Reads the "cleaning" config object; validates threshold range, blacklist
/// entries and patterns (kInvalidConfig / kInvalidPattern).
FilterConfig filter_config_from_json(const nlohmann::json& j);

struct FilterReason {
  std::string rule;
  std::string evidence;
  std::size_t begin = 0;  // byte span in the inspected field, end exclusive
  std::size_t end = 0;
};

enum class Verdict { kAccept, kReject };

struct FilterDecision {
  Verdict verdict = Verdict::kAccept;
  std::vector<FilterReason> reasons;

  bool accepted() const { return verdict == Verdict::kAccept; }
};

/// Keyword blacklist (case-folded whole-token match; Han characters are
/// single tokens, so Chinese entries match as token sequences) and the
/// dominant-script proportion of body letters.
/// Throws Error(kEmptyDocument) when the body is blank.
FilterDecision apply_rule_filters(const Document& doc, const FilterConfig& config);

/// `10.<4-9 digits>/<non-empty suffix without whitespace>`.
bool is_valid_doi(std::string_view doi);

FilterDecision validate_metadata(const Document& doc, const RequiredMetadata& required);

enum class ClassifierLabel { kScientific, kNonScientific, kToxic };
std::string_view to_string(ClassifierLabel l);

class ExternalClassifier {
 public:
  virtual ~ExternalClassifier() = default;
  /// Returns the raw label string. Implementations must be thread-safe.
  virtual std::string classify(std::string_view id, std::string_view text) = 0;
};

/// Offline classifier backed by a fixture table of id -> label.
class FixtureClassifier : public ExternalClassifier {
 public:
  explicit FixtureClassifier(std::unordered_map<std::string, std::string> table,
                             std::optional<std::string> default_label = std::nullopt);
  /// Fixture file: one {"id": ..., "label": ...} object per line.
  static FixtureClassifier from_file(const std::filesystem::path& path,
                                     std::optional<std::string> default_label = std::nullopt);

  std::string classify(std::string_view id, std::string_view text) override;

 private:
  std::unordered_map<std::string, std::string> table_;
  std::optional<std::string> default_label_;
};

/// POSTs {"id", "text"} and expects {"label"} back.
class HttpClassifier : public ExternalClassifier {
 public:
  explicit HttpClassifier(HttpEndpoint endpoint);
  std::string classify(std::string_view id, std::string_view text) override;

 private:
  JsonHttpClient client_;
};

/// Throws kClassifierMalformedReply for labels outside the enum.
ClassifierLabel classify_document(const Document& doc, ExternalClassifier& classifier);

struct CleanOutcome {
  Document document;  // PII-scrubbed copy
  FilterDecision decision;
  std::map<std::string, std::size_t> redactions;
};

/// Full per-document chain: rule filters, PII scrub of title/abstract/body,
/// metadata validation, then the classifier (skipped when null or when an
/// earlier stage already rejected). A blank body rejects with rule
/// "empty_document".
CleanOutcome clean_document(const Document& doc, const FilterConfig& config,
                            ExternalClassifier* classifier);

}  // namespace scibench
