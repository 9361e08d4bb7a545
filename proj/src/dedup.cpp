#include "scibench/dedup.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "scibench/io.hpp"
#include "scibench/parallel.hpp"
#include "scibench/text.hpp"

namespace scibench {

namespace {

// splitmix64 / murmur3 finalizer: a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Byte offsets of unit boundaries: words (split on the single spaces of a
// normalized string) or code points.
std::vector<std::size_t> unit_starts(std::string_view s, ShingleMode mode) {
  std::vector<std::size_t> starts;
  if (mode == ShingleMode::kWord) {
    std::size_t i = 0;
    while (i < s.size()) {
      starts.push_back(i);
      const std::size_t sp = s.find(' ', i);
      if (sp == std::string_view::npos) break;
      i = sp + 1;
    }
  } else {
    std::size_t pos = 0;
    while (pos < s.size()) {
      starts.push_back(pos);
      text::next_code_point(s, pos);
    }
  }
  return starts;
}

std::size_t unit_count(std::string_view normalized, ShingleMode mode) {
  return unit_starts(normalized, mode).size();
}

ShingleSet shingle_normalized(std::string_view s, std::size_t k, ShingleMode mode, std::string doc_id) {
  const auto starts = unit_starts(s, mode);
  if (starts.size() < k) {
    throw Error(ErrorCode::kTextTooShort,
                "need " + std::to_string(k) + " units, have " + std::to_string(starts.size()));
  }
  ShingleSet out{std::move(doc_id), {}, k, mode};
  out.shingles.reserve(starts.size() - k + 1);
  for (std::size_t i = 0; i + k <= starts.size(); ++i) {
    const std::size_t begin = starts[i];
    std::size_t end = (i + k < starts.size()) ? starts[i + k] : s.size();
    if (mode == ShingleMode::kWord && i + k < starts.size()) --end;  // drop the separating space
    out.shingles.push_back(hash_shingle(s.substr(begin, end - begin)));
  }
  std::sort(out.shingles.begin(), out.shingles.end());
  out.shingles.erase(std::unique(out.shingles.begin(), out.shingles.end()), out.shingles.end());
  return out;
}

ShingleMode mode_for(std::string_view normalized) {
  const auto c = text::count_scripts(normalized);
  return c.han > c.latin ? ShingleMode::kChar : ShingleMode::kWord;
}

}  // namespace

std::string normalize_for_shingling(std::string_view text) {
  return text::collapse_whitespace(text::fold_case(text));
}

std::uint64_t hash_shingle(std::string_view window) { return mix64(io::fnv1a64(window)); }

ShingleSet shingle(std::string_view text, std::size_t k, ShingleMode mode, std::string doc_id) {
  if (k == 0) throw Error(ErrorCode::kInvalidLshConfig, "shingle size k must be >= 1");
  const std::string normalized = normalize_for_shingling(text);
  return shingle_normalized(normalized, k, mode, std::move(doc_id));
}

void LshConfig::validate() const {
  if (num_perms == 0 || bands == 0 || rows_per_band == 0) {
    throw Error(ErrorCode::kInvalidLshConfig, "num_perms, bands and rows_per_band must be positive");
  }
  if (bands * rows_per_band != num_perms) {
    throw Error(ErrorCode::kInvalidLshConfig,
                "bands (" + std::to_string(bands) + ") x rows_per_band (" + std::to_string(rows_per_band) +
                    ") != num_perms (" + std::to_string(num_perms) + ")");
  }
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidLshConfig, "jaccard_threshold must lie in [0, 1]");
  }
}

MinHasher::MinHasher(const LshConfig& cfg) : seed_(cfg.seed), salts_(cfg.num_perms) {
  std::uint64_t state = cfg.seed;
  for (auto& salt : salts_) {
    state += 0x9e3779b97f4a7c15ULL;
    salt = mix64(state);
  }
}

std::uint64_t MinHasher::hash(std::size_t i, std::uint64_t shingle) const { return mix64(shingle ^ salts_[i]); }

MinHashSignature MinHasher::sign(const ShingleSet& s) const {
  MinHashSignature sig{s.doc_id, std::vector<std::uint64_t>(salts_.size(), ~std::uint64_t{0}), seed_};
  for (const std::uint64_t x : s.shingles) {
    for (std::size_t i = 0; i < salts_.size(); ++i) {
      const std::uint64_t h = mix64(x ^ salts_[i]);
      if (h < sig.values[i]) sig.values[i] = h;
    }
  }
  return sig;
}

MinHashSignature minhash_signature(const ShingleSet& s, const LshConfig& cfg) { return MinHasher(cfg).sign(s); }

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.seed != b.seed || a.values.size() != b.values.size() || a.values.empty()) {
    throw Error(ErrorCode::kIncompatibleSignatures,
                a.doc_id + " (" + std::to_string(a.values.size()) + " slots) vs " + b.doc_id + " (" +
                    std::to_string(b.values.size()) + " slots)");
  }
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) equal += a.values[i] == b.values[i];
  return static_cast<double>(equal) / static_cast<double>(a.values.size());
}

std::string dedup_text(const Document& doc, bool abstract_only) {
  if (abstract_only) return doc.abstract_text;
  std::string out = doc.title;
  out += '\n';
  out += doc.abstract_text;
  out += '\n';
  out += doc.body;
  return out;
}

std::vector<DuplicateCluster> find_near_duplicates(const std::vector<Document>& corpus, const DedupConfig& cfg) {
  cfg.lsh.validate();
  const std::size_t n = corpus.size();
  UnionFind uf(n);

  std::vector<std::string> normalized(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    normalized[i] = normalize_for_shingling(dedup_text(corpus[i], cfg.abstract_only));
  });

  // exact pass
  std::vector<std::size_t> distinct;
  {
    std::unordered_map<std::string_view, std::size_t> first_seen;
    first_seen.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = first_seen.emplace(normalized[i], i);
      if (inserted) {
        if (!normalized[i].empty()) distinct.push_back(i);
      } else {
        uf.unite(it->second, i);
      }
    }
  }

  // fuzzy pass over distinct texts
  const MinHasher hasher(cfg.lsh);
  std::vector<MinHashSignature> sigs(distinct.size());
  parallel_for(distinct.size(), cfg.jobs, [&](std::size_t j) {
    const std::string& s = normalized[distinct[j]];
    const ShingleMode mode = mode_for(s);
    const std::size_t k = mode == ShingleMode::kWord ? cfg.word_k : cfg.char_k;
    const std::size_t units = unit_count(s, mode);
    sigs[j] = hasher.sign(shingle_normalized(s, std::min(k, units), mode, corpus[distinct[j]].id));
  });

  const std::size_t rows = cfg.lsh.rows_per_band;
  for (std::size_t band = 0; band < cfg.lsh.bands; ++band) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    buckets.reserve(distinct.size());
    for (std::size_t j = 0; j < sigs.size(); ++j) {
      std::uint64_t key = mix64(band + 1);
      for (std::size_t r = 0; r < rows; ++r) key = mix64(key ^ sigs[j].values[band * rows + r]);
      buckets[key].push_back(j);
    }
    for (const auto& [key, members] : buckets) {
      for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          const std::size_t a = distinct[members[x]];
          const std::size_t b = distinct[members[y]];
          if (uf.find(a) == uf.find(b)) continue;
          if (estimate_jaccard(sigs[members[x]], sigs[members[y]]) >= cfg.lsh.jaccard_threshold) uf.unite(a, b);
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::string>> components;
  for (std::size_t i = 0; i < n; ++i) components[uf.find(i)].push_back(corpus[i].id);
  std::vector<DuplicateCluster> clusters;
  for (auto& [root, ids] : components) {
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    clusters.push_back({ids.front(), std::move(ids)});
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const DuplicateCluster& a, const DuplicateCluster& b) { return a.representative < b.representative; });
  return clusters;
}

std::string format_clusters(const std::vector<DuplicateCluster>& clusters) {
  std::string out;
  for (const auto& c : clusters) {
    out += c.representative;
    for (const auto& m : c.members) {
      if (m == c.representative) continue;
      out += '\t';
      out += m;
    }
    out += '\n';
  }
  return out;
}

}  // namespace scibench
