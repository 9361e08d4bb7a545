#include "scibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "scibench/text.hpp"

namespace scibench {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

template <class Key>
std::size_t multiset_intersection(const std::map<Key, std::size_t>& a, const std::map<Key, std::size_t>& b) {
  std::size_t n = 0;
  for (const auto& [k, ca] : a) {
    auto it = b.find(k);
    if (it != b.end()) n += std::min(ca, it->second);
  }
  return n;
}

}  // namespace

TokenSequence tokenize(std::string_view input, TokenMode mode) {
  TokenSequence seq;
  seq.mode = mode;
  auto spans = text::split_tokens(input, mode != TokenMode::kLatin);
  seq.tokens.reserve(spans.size());
  for (auto& s : spans) seq.tokens.push_back(std::move(s.text));
  return seq;
}

PRF PRF::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision_degenerate = tp + fp == 0;
  r.recall_degenerate = tp + fn == 0;
  r.precision = r.precision_degenerate ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = r.recall_degenerate ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

PRF& PRF::operator+=(const PRF& other) {
  *this = from_counts(tp + other.tp, fp + other.fp, fn + other.fn);
  return *this;
}

void check_gold_mentions(const std::vector<EntityMention>& gold) {
  std::vector<const EntityMention*> sorted;
  sorted.reserve(gold.size());
  for (const auto& g : gold) sorted.push_back(&g);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->start != b->start ? a->start < b->start : a->end < b->end;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start < sorted[i - 1]->end) {
      throw Error(ErrorCode::kOverlappingGoldMentions,
                  "\"" + sorted[i - 1]->surface + "\" [" + std::to_string(sorted[i - 1]->start) + "," +
                      std::to_string(sorted[i - 1]->end) + ") and \"" + sorted[i]->surface + "\" [" +
                      std::to_string(sorted[i]->start) + "," + std::to_string(sorted[i]->end) + ")");
    }
  }
}

bool surface_matches(const EntityMention& m, std::string_view source) {
  const auto cps = text::decode_utf8(source);
  if (m.start >= m.end || m.end > cps.size()) return false;
  std::string slice;
  for (std::size_t i = m.start; i < m.end; ++i) text::append_utf8(slice, cps[i]);
  return slice == m.surface;
}

PRF ner_strict_f1(const std::vector<EntityMention>& pred, const std::vector<EntityMention>& gold) {
  check_gold_mentions(gold);
  std::map<EntityMention, std::size_t> p;
  std::map<EntityMention, std::size_t> g;
  for (const auto& m : pred) ++p[m];
  for (const auto& m : gold) ++g[m];
  const std::size_t tp = multiset_intersection(p, g);
  return PRF::from_counts(tp, pred.size() - tp, gold.size() - tp);
}

PRF re_micro_f1(const std::vector<RelationTriple>& pred, const std::vector<RelationTriple>& gold) {
  auto norm = [](const RelationTriple& t) {
    return RelationTriple{text::collapse_whitespace(t.head), text::collapse_whitespace(t.relation),
                          text::collapse_whitespace(t.tail)};
  };
  std::map<RelationTriple, std::size_t> p;
  std::map<RelationTriple, std::size_t> g;
  for (const auto& t : pred) ++p[norm(t)];
  for (const auto& t : gold) ++g[norm(t)];
  const std::size_t tp = multiset_intersection(p, g);
  return PRF::from_counts(tp, pred.size() - tp, gold.size() - tp);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  if (reference.tokens.empty()) throw Error(ErrorCode::kEmptyReference, "rouge_l reference has no tokens");
  if (candidate.tokens.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate.tokens, reference.tokens));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.tokens.size());
  const double r = lcs / static_cast<double>(reference.tokens.size());
  return 2.0 * p * r / (p + r);
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() > matches.size()) {
    matches.resize(other.matches.size(), 0);
    totals.resize(other.totals.size(), 0);
  }
  for (std::size_t i = 0; i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

double BleuStats::score(BleuSmoothing smoothing) const {
  if (candidate_length == 0 || matches.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    double m = static_cast<double>(matches[i]);
    double t = static_cast<double>(totals[i]);
    if (smoothing == BleuSmoothing::kAddOne && i > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(candidate_length);
  const double r = static_cast<double>(reference_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(matches.size()));
}

BleuStats bleu_stats(const TokenSequence& candidate, const std::vector<TokenSequence>& references,
                     std::size_t max_n) {
  const bool any_nonempty =
      std::any_of(references.begin(), references.end(), [](const TokenSequence& r) { return !r.tokens.empty(); });
  if (!any_nonempty) throw Error(ErrorCode::kEmptyReferenceList, "bleu needs at least one nonempty reference");
  BleuStats stats(max_n);
  stats.candidate_length = candidate.tokens.size();

  std::size_t best = 0;
  bool have = false;
  for (const auto& ref : references) {
    if (ref.tokens.empty()) continue;
    const std::size_t len = ref.tokens.size();
    const auto diff = [&](std::size_t l) { return l > stats.candidate_length ? l - stats.candidate_length
                                                                              : stats.candidate_length - l; };
    if (!have || diff(len) < diff(best) || (diff(len) == diff(best) && len < best)) {
      best = len;
      have = true;
    }
  }
  stats.reference_length = best;

  for (std::size_t n = 1; n <= max_n; ++n) {
    const NgramCounts cand = count_ngrams(candidate.tokens, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, c] : count_ngrams(ref.tokens, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, c);
      }
    }
    stats.matches[n - 1] = multiset_intersection(cand, max_ref);
    stats.totals[n - 1] = candidate.tokens.size() >= n ? candidate.tokens.size() - n + 1 : 0;
  }
  return stats;
}

double bleu(const TokenSequence& candidate, const std::vector<TokenSequence>& references, std::size_t max_n,
            BleuSmoothing smoothing) {
  return bleu_stats(candidate, references, max_n).score(smoothing);
}

double accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(pred.size()) + " predictions vs " + std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw Error(ErrorCode::kEmptyInput, "accuracy over zero labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    hits += text::collapse_whitespace(pred[i]) == text::collapse_whitespace(gold[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

std::string normalize_item(std::string_view s) { return text::collapse_whitespace(text::fold_case(s)); }

PRF set_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold, const Normalizer& normalizer) {
  std::set<std::string> p;
  std::set<std::string> g;
  for (const auto& s : pred) p.insert(normalizer(s));
  for (const auto& s : gold) g.insert(normalizer(s));
  std::size_t tp = 0;
  for (const auto& s : p) tp += g.count(s);
  return PRF::from_counts(tp, p.size() - tp, g.size() - tp);
}

TopicScore score_topic_terms(const std::vector<std::string>& pred_terms, const std::vector<std::string>& gold_terms,
                             TopicMode mode) {
  if (gold_terms.empty()) throw Error(ErrorCode::kEmptyGold, "topic modeling gold has no terms");
  TopicScore out;
  out.valid_count = pred_terms.size() >= 3 && pred_terms.size() <= 7;
  if (mode == TopicMode::kSetF1) {
    out.score = set_f1(pred_terms, gold_terms).f1;
    return out;
  }
  auto as_tokens = [](const std::vector<std::string>& terms) {
    TokenSequence seq;
    seq.mode = TokenMode::kMixed;
    for (const auto& t : terms) {
      std::string n = normalize_item(t);
      if (!n.empty()) seq.tokens.push_back(std::move(n));
    }
    return seq;
  };
  const TokenSequence gold = as_tokens(gold_terms);
  if (gold.tokens.empty()) throw Error(ErrorCode::kEmptyGold, "topic modeling gold terms are blank");
  out.score = bleu(as_tokens(pred_terms), {gold}, 4, BleuSmoothing::kAddOne);
  return out;
}

}  // namespace scibench
