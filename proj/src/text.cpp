#include "scibench/text.hpp"

#include <algorithm>

namespace scibench::text {

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacementChar;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacementChar;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if (!is_continuation(b)) {
      ++pos;
      return kReplacementChar;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // overlong encodings, surrogates and out-of-range values
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) {
    ++pos;
    return kReplacementChar;
  }
  pos += len;
  return cp;
}

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(next_code_point(s, pos));
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t before = pos;
    const char32_t cp = next_code_point(s, pos);
    if (cp == kReplacementChar) {
      // a literal U+FFFD is three bytes; a decoding error consumes one
      if (pos - before != 3) return false;
    }
  }
  return true;
}

std::size_t code_point_count(std::string_view s) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    next_code_point(s, pos);
    ++n;
  }
  return n;
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return CharClass::kLatinLetter;
    if (cp >= '0' && cp <= '9') return CharClass::kDigit;
    if (cp == ' ' || (cp >= 0x09 && cp <= 0x0D)) return CharClass::kSpace;
    if (cp > 0x20 && cp < 0x7F) return CharClass::kPunct;
    return CharClass::kOther;
  }
  if (cp == 0xA0 || cp == 0x1680 || in(cp, 0x2000, 0x200A) || cp == 0x2028 || cp == 0x2029 ||
      cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0x85) {
    return CharClass::kSpace;
  }
  if (in(cp, 0x00C0, 0x024F) && cp != 0xD7 && cp != 0xF7) return CharClass::kLatinLetter;
  if (in(cp, 0x1E00, 0x1EFF)) return CharClass::kLatinLetter;
  if (in(cp, 0x3400, 0x4DBF) || in(cp, 0x4E00, 0x9FFF) || in(cp, 0xF900, 0xFAFF) ||
      in(cp, 0x20000, 0x2FA1F)) {
    return CharClass::kHanLetter;
  }
  if (in(cp, 0xFF10, 0xFF19)) return CharClass::kDigit;
  if (in(cp, 0xFF21, 0xFF3A) || in(cp, 0xFF41, 0xFF5A)) return CharClass::kLatinLetter;
  if (in(cp, 0x00A1, 0x00BF) || cp == 0xD7 || cp == 0xF7 || in(cp, 0x2010, 0x2027) ||
      in(cp, 0x2030, 0x205E) || in(cp, 0x3001, 0x3004) || in(cp, 0x3008, 0x303F) ||
      in(cp, 0xFE30, 0xFE6F) || in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) ||
      in(cp, 0xFF3B, 0xFF40) || in(cp, 0xFF5B, 0xFF65)) {
    return CharClass::kPunct;
  }
  if (in(cp, 0x0370, 0x03FF) || in(cp, 0x0400, 0x052F) || in(cp, 0x0530, 0x058F) ||
      in(cp, 0x0590, 0x05FF) || in(cp, 0x0600, 0x06FF) || in(cp, 0x0900, 0x097F) ||
      in(cp, 0x0E00, 0x0E7F) || in(cp, 0x1100, 0x11FF) || in(cp, 0xAC00, 0xD7AF) ||
      in(cp, 0x3040, 0x30FF)) {
    return CharClass::kOtherLetter;
  }
  return CharClass::kOther;
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;  // Greek
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;                 // Cyrillic
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  if (in(cp, 0xFF21, 0xFF3A)) return cp + 0x20;  // fullwidth Latin
  return cp;
}

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(s, pos);
    const char32_t folded = fold_case(cp);
    if (folded == cp) {
      out.append(s.substr(start, pos - start));
    } else {
      append_utf8(out, folded);
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(s, pos);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(s.substr(start, pos - start));
  }
  return out;
}

double ScriptCounts::dominant_fraction() const {
  const std::size_t total = letters();
  if (total == 0) return 0.0;
  return static_cast<double>(std::max(latin, han)) / static_cast<double>(total);
}

ScriptCounts count_scripts(std::string_view s) {
  ScriptCounts counts;
  std::size_t pos = 0;
  while (pos < s.size()) {
    switch (classify(next_code_point(s, pos))) {
      case CharClass::kLatinLetter: ++counts.latin; break;
      case CharClass::kHanLetter: ++counts.han; break;
      case CharClass::kOtherLetter: ++counts.other; break;
      default: break;
    }
  }
  return counts;
}

LanguageTag detect_language(std::string_view s, double threshold) {
  const ScriptCounts c = count_scripts(s);
  const double total = static_cast<double>(c.letters());
  if (total == 0) return LanguageTag::kMixed;
  if (static_cast<double>(c.latin) / total >= threshold && c.latin >= c.han) return LanguageTag::kEn;
  if (static_cast<double>(c.han) / total >= threshold) return LanguageTag::kZh;
  return LanguageTag::kMixed;
}

std::vector<TokenSpan> split_tokens(std::string_view s, bool han_per_char) {
  std::vector<TokenSpan> tokens;
  TokenSpan current{{}, 0, 0};
  bool open = false;
  auto flush = [&](std::size_t end) {
    if (open) {
      current.end = end;
      tokens.push_back(std::move(current));
      current = TokenSpan{{}, 0, 0};
      open = false;
    }
  };
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = next_code_point(s, pos);
    const CharClass cls = classify(cp);
    if (cls == CharClass::kSpace || cls == CharClass::kPunct) {
      flush(start);
      continue;
    }
    if (han_per_char && cls == CharClass::kHanLetter) {
      flush(start);
      TokenSpan single{{}, start, pos};
      append_utf8(single.text, cp);
      tokens.push_back(std::move(single));
      continue;
    }
    if (!open) {
      open = true;
      current.begin = start;
    }
    append_utf8(current.text, fold_case(cp));
  }
  flush(s.size());
  return tokens;
}

}  // namespace scibench::text
