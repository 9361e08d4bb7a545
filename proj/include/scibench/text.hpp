#pragma once

// UTF-8 helpers and the coarse Unicode script classification shared by the
// cleaning filters, the shingler and the metric tokenizer.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scibench::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes one code point starting at `pos` and advances `pos`. Malformed
/// sequences yield U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);

std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
bool is_valid_utf8(std::string_view s);
std::size_t code_point_count(std::string_view s);

enum class CharClass { kLatinLetter, kHanLetter, kOtherLetter, kDigit, kSpace, kPunct, kOther };

CharClass classify(char32_t cp);

inline bool is_han(char32_t cp) { return classify(cp) == CharClass::kHanLetter; }
inline bool is_space(char32_t cp) { return classify(cp) == CharClass::kSpace; }
inline bool is_separator(char32_t cp) {
  auto c = classify(cp);
  return c == CharClass::kSpace || c == CharClass::kPunct;
}

/// Simple case folding: ASCII, Latin-1 and Greek/Cyrillic uppercase blocks.
char32_t fold_case(char32_t cp);
std::string fold_case(std::string_view s);

/// Trim and collapse every run of Unicode whitespace to one ASCII space.
std::string collapse_whitespace(std::string_view s);

/// Letter counts per script class; digits, punctuation and spaces are ignored.
struct ScriptCounts {
  std::size_t latin = 0;
  std::size_t han = 0;
  std::size_t other = 0;

  std::size_t letters() const { return latin + han + other; }
  /// max(latin, han) / letters, or 0 when there are no letters.
  double dominant_fraction() const;
};

ScriptCounts count_scripts(std::string_view s);

enum class LanguageTag { kEn, kZh, kMixed };

/// en when Latin letters reach `threshold` of all letters, zh when Han
/// letters do, otherwise mixed.
LanguageTag detect_language(std::string_view s, double threshold = 0.7);

struct TokenSpan {
  std::string text;   // case-folded token text
  std::size_t begin;  // byte offsets into the source, end exclusive
  std::size_t end;
};

/// Splits on whitespace and punctuation. With `han_per_char`, every Han
/// character becomes its own token and also breaks surrounding runs.
std::vector<TokenSpan> split_tokens(std::string_view s, bool han_per_char);

}  // namespace scibench::text
