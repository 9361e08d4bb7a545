#pragma once

// Reference scorers for the benchmark tasks. All functions are pure; corpus
// aggregation goes through the additive count types (PRF, BleuStats).

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "scibench/records.hpp"

namespace scibench {

struct TokenSequence {
  std::vector<std::string> tokens;
  TokenMode mode = TokenMode::kLatin;
};

/// latin: case-fold, split on whitespace and punctuation.
/// cjk / mixed: additionally one token per Han character.
TokenSequence tokenize(std::string_view text, TokenMode mode);

/// Precision/recall/F1 with the raw tallies. A zero denominator yields 0 and
/// sets the matching degenerate flag.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool precision_degenerate = true;
  bool recall_degenerate = true;

  static PRF from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  /// Micro-average merge: sums the tallies and recomputes the ratios.
  PRF& operator+=(const PRF& other);
  friend PRF operator+(PRF a, const PRF& b) { return a += b; }
};

/// Throws kOverlappingGoldMentions when two gold spans intersect.
void check_gold_mentions(const std::vector<EntityMention>& gold);

/// True when `m.surface` equals the code-point slice [start, end) of source.
bool surface_matches(const EntityMention& m, std::string_view source);

/// Strict matching: surface, type and span must all agree; each gold
/// mention absorbs at most one prediction.
PRF ner_strict_f1(const std::vector<EntityMention>& pred, const std::vector<EntityMention>& gold);

/// Multiset matching on whitespace-normalized (head, relation, tail).
PRF re_micro_f1(const std::vector<RelationTriple>& pred, const std::vector<RelationTriple>& gold);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// LCS F-measure with beta = 1. Throws kEmptyReference.
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

enum class BleuSmoothing { kNone, kAddOne };

/// Sufficient statistics for BLEU; additive across sentences.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped n-gram matches, index n-1
  std::vector<std::size_t> totals;   // candidate n-gram counts
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;  // closest reference length (ties to shorter)

  explicit BleuStats(std::size_t max_n = 4) : matches(max_n, 0), totals(max_n, 0) {}
  BleuStats& operator+=(const BleuStats& other);
  /// none: 0 whenever some precision is 0. add_one: (m+1)/(t+1) for n >= 2.
  double score(BleuSmoothing smoothing) const;
};

/// Throws kEmptyReferenceList unless at least one reference is nonempty.
BleuStats bleu_stats(const TokenSequence& candidate, const std::vector<TokenSequence>& references,
                     std::size_t max_n = 4);

double bleu(const TokenSequence& candidate, const std::vector<TokenSequence>& references, std::size_t max_n = 4,
            BleuSmoothing smoothing = BleuSmoothing::kAddOne);

/// Exact-match fraction after whitespace normalization.
/// Throws kLengthMismatch / kEmptyInput.
double accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

using Normalizer = std::function<std::string(std::string_view)>;

/// Case-fold, trim, collapse internal whitespace.
std::string normalize_item(std::string_view s);

/// Unordered exact matching of normalized items (duplicates collapse).
PRF set_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
           const Normalizer& normalizer = normalize_item);

enum class TopicMode { kBleu, kSetF1 };

struct TopicScore {
  double score = 0.0;
  bool valid_count = false;  // 3 <= |pred_terms| <= 7
};

/// bleu mode: each normalized term is one token, BLEU-4 with add-one
/// smoothing. set_f1 mode: unordered exact term overlap. Throws kEmptyGold.
TopicScore score_topic_terms(const std::vector<std::string>& pred_terms, const std::vector<std::string>& gold_terms,
                             TopicMode mode);

}  // namespace scibench
