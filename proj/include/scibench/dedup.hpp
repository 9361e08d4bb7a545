#pragma once

// MinHash / LSH near-duplicate detection.
//
// Documents are normalized (case-folded, whitespace collapsed) and shingled
// into word k-grams, or character k-grams when Han letters outnumber Latin
// ones. Each shingle is hashed to 64 bits; signature slot i holds the minimum
// of the i-th seeded hash over the shingle set, so the fraction of equal
// slots between two signatures estimates their Jaccard similarity.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scibench/records.hpp"

namespace scibench {

enum class ShingleMode { kWord, kChar };

struct ShingleSet {
  std::string doc_id;
  std::vector<std::uint64_t> shingles;  // sorted, unique
  std::size_t k = 0;
  ShingleMode mode = ShingleMode::kWord;
};

/// Lowercase and collapse whitespace.
std::string normalize_for_shingling(std::string_view text);

std::uint64_t hash_shingle(std::string_view window);

/// Throws kTextTooShort when the normalized text has fewer than k units,
/// kInvalidLshConfig when k == 0.
ShingleSet shingle(std::string_view text, std::size_t k, ShingleMode mode, std::string doc_id = {});

struct LshConfig {
  std::size_t num_perms = 256;
  std::size_t bands = 32;
  std::size_t rows_per_band = 8;
  double jaccard_threshold = 0.8;
  std::uint64_t seed = 0x5eed5eed5eedULL;

  /// Throws kInvalidLshConfig unless bands * rows_per_band == num_perms etc.
  void validate() const;
};

struct MinHashSignature {
  std::string doc_id;
  std::vector<std::uint64_t> values;
  std::uint64_t seed = 0;
};

/// The family of seeded hash functions behind a signature. Construct once
/// per config and reuse across documents.
class MinHasher {
 public:
  explicit MinHasher(const LshConfig& cfg);

  std::size_t num_perms() const { return salts_.size(); }
  std::uint64_t hash(std::size_t i, std::uint64_t shingle) const;
  MinHashSignature sign(const ShingleSet& s) const;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> salts_;
};

MinHashSignature minhash_signature(const ShingleSet& s, const LshConfig& cfg);

/// Fraction of equal slots. Throws kIncompatibleSignatures on seed or
/// length mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct DedupConfig {
  LshConfig lsh;
  std::size_t word_k = 5;
  std::size_t char_k = 8;
  bool abstract_only = false;
  std::size_t jobs = 1;
};

struct DuplicateCluster {
  std::string representative;        // lexicographically smallest id
  std::vector<std::string> members;  // sorted, includes the representative

  bool operator==(const DuplicateCluster&) const = default;
};

/// Text fed to the shingler: title, abstract and body joined by newlines,
/// or the abstract alone.
std::string dedup_text(const Document& doc, bool abstract_only);

/// Exact duplicates (identical normalized text) are grouped first; the
/// remaining distinct texts are signed, bucketed by LSH band, and candidate
/// pairs whose estimated Jaccard reaches the threshold are joined. Clusters
/// are the connected components of size >= 2, sorted by representative.
/// Texts shorter than k units are shingled as a single unit.
std::vector<DuplicateCluster> find_near_duplicates(const std::vector<Document>& corpus, const DedupConfig& cfg);

/// One line per cluster: representative, then members, tab-separated.
std::string format_clusters(const std::vector<DuplicateCluster>& clusters);

}  // namespace scibench
