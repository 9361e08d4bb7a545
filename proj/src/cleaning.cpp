#include "scibench/cleaning.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/regex.hpp>
#include <cctype>
#include <nlohmann/json.hpp>

#include "scibench/io.hpp"
#include "scibench/text.hpp"

namespace scibench {

namespace {

using json = nlohmann::json;

// RFC 5322-ish local part and dotted domain ending in an alphabetic TLD.
constexpr const char* kEmailPattern =
    R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})";
// 15-18 contiguous digits; an 18-digit id may end in a check character X.
constexpr const char* kIdNumberPattern = R"((?<![0-9A-Za-z])[0-9]{14,17}[0-9Xx](?![0-9A-Za-z]))";
// 7-15 digits, optionally "+"-prefixed, separated by single spaces or hyphens.
constexpr const char* kPhonePattern = R"((?<![\w.+\-])\+?[0-9](?:[ \-]?[0-9]){6,14}(?![\w]|-[0-9]))";

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_blank(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (!text::is_space(text::next_code_point(s, pos))) return false;
  }
  return true;
}

}  // namespace

struct PiiPatterns::Impl {
  struct Entry {
    std::string name;
    std::string source;
    std::string replacement;
    boost::regex re;
  };
  std::vector<Entry> entries;
};

PiiPatterns::PiiPatterns() : impl_(std::make_unique<Impl>()) {}
PiiPatterns::~PiiPatterns() = default;
PiiPatterns::PiiPatterns(const PiiPatterns& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
PiiPatterns& PiiPatterns::operator=(const PiiPatterns& o) {
  if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
PiiPatterns::PiiPatterns(PiiPatterns&&) noexcept = default;
PiiPatterns& PiiPatterns::operator=(PiiPatterns&&) noexcept = default;

PiiPatterns PiiPatterns::defaults() {
  return compile({{"email", kEmailPattern}, {"id_number", kIdNumberPattern}, {"phone", kPhonePattern}});
}

PiiPatterns PiiPatterns::compile(const std::vector<std::pair<std::string, std::string>>& named) {
  PiiPatterns out;
  for (const auto& [name, source] : named) {
    if (name.empty()) throw Error(ErrorCode::kInvalidPattern, "pattern with empty name");
    try {
      out.impl_->entries.push_back({name, source, "[" + upper_ascii(name) + "]",
                                    boost::regex(source, boost::regex::perl)});
    } catch (const boost::regex_error& e) {
      throw Error(ErrorCode::kInvalidPattern, name + ": " + e.what());
    }
  }
  return out;
}

std::size_t PiiPatterns::size() const { return impl_->entries.size(); }
const std::string& PiiPatterns::name(std::size_t i) const { return impl_->entries.at(i).name; }

const std::string& PiiPatterns::source(std::string_view name) const {
  for (const auto& e : impl_->entries) {
    if (e.name == name) return e.source;
  }
  throw Error(ErrorCode::kInvalidConfig, "no pattern named " + std::string(name));
}

struct PiiScrubber {
  static ScrubResult run(std::string_view input, const PiiPatterns& patterns) {
    ScrubResult result;
    result.text.assign(input);
    for (const auto& entry : patterns.impl_->entries) {
      std::size_t& count = result.redactions[entry.name];
      std::string out;
      out.reserve(result.text.size());
      auto last = result.text.cbegin();
      boost::sregex_iterator it(result.text.cbegin(), result.text.cend(), entry.re);
      for (const boost::sregex_iterator end; it != end; ++it) {
        const auto& m = (*it)[0];
        if (m.length() == 0) continue;  // empty matches never redact
        out.append(last, m.first);
        out.append(entry.replacement);
        result.matched_bytes += static_cast<std::size_t>(m.length());
        ++count;
        last = m.second;
      }
      out.append(last, result.text.cend());
      result.text = std::move(out);
    }
    return result;
  }
};

ScrubResult scrub_pii(std::string_view input, const PiiPatterns& patterns) {
  return PiiScrubber::run(input, patterns);
}

FilterConfig filter_config_from_json(const json& j) {
  FilterConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "cleaning section must be an object");
  try {
    if (j.contains("keyword_blacklist")) {
      cfg.keyword_blacklist = j.at("keyword_blacklist").get<std::vector<std::string>>();
    }
    cfg.language_threshold = j.value("language_threshold", cfg.language_threshold);
    if (j.contains("pii_patterns")) {
      const json& p = j.at("pii_patterns");
      std::vector<std::pair<std::string, std::string>> named;
      if (p.is_array()) {
        // [{"name": ..., "pattern": ...}] keeps an explicit order
        for (const auto& e : p) named.emplace_back(e.at("name").get<std::string>(), e.at("pattern").get<std::string>());
      } else {
        // object form: override or add to the defaults, defaults order first
        named = {{"email", kEmailPattern}, {"id_number", kIdNumberPattern}, {"phone", kPhonePattern}};
        for (const auto& [k, v] : p.items()) {
          auto it = std::find_if(named.begin(), named.end(), [&](const auto& e) { return e.first == k; });
          if (v.is_null()) {
            if (it != named.end()) named.erase(it);
          } else if (it != named.end()) {
            it->second = v.get<std::string>();
          } else {
            named.emplace_back(k, v.get<std::string>());
          }
        }
      }
      cfg.pii_patterns = PiiPatterns::compile(named);
    }
    if (j.contains("required_metadata")) {
      const json& r = j.at("required_metadata");
      cfg.required_metadata.abstract_nonempty = r.value("abstract_nonempty", cfg.required_metadata.abstract_nonempty);
      cfg.required_metadata.doi_valid = r.value("doi_valid", cfg.required_metadata.doi_valid);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("cleaning: ") + e.what());
  }
  if (!(cfg.language_threshold >= 0.0 && cfg.language_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "language_threshold must lie in [0, 1]");
  }
  for (const auto& kw : cfg.keyword_blacklist) {
    if (text::split_tokens(kw, true).empty()) {
      throw Error(ErrorCode::kInvalidConfig, "blacklist entry \"" + kw + "\" has no tokens");
    }
  }
  return cfg;
}

FilterDecision apply_rule_filters(const Document& doc, const FilterConfig& config) {
  if (is_blank(doc.body)) throw Error(ErrorCode::kEmptyDocument, doc.id);
  FilterDecision decision;

  if (!config.keyword_blacklist.empty()) {
    const auto tokens = text::split_tokens(doc.body, true);
    for (const auto& keyword : config.keyword_blacklist) {
      const auto needle = text::split_tokens(keyword, true);
      if (needle.empty() || needle.size() > tokens.size()) continue;
      for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size() && match; ++k) match = tokens[i + k].text == needle[k].text;
        if (match) {
          const std::size_t b = tokens[i].begin;
          const std::size_t e = tokens[i + needle.size() - 1].end;
          decision.reasons.push_back({"keyword_blacklist", doc.body.substr(b, e - b), b, e});
          break;  // one reason per keyword
        }
      }
    }
  }

  const auto counts = text::count_scripts(doc.body);
  const double dominant = counts.dominant_fraction();
  if (dominant < config.language_threshold) {
    decision.reasons.push_back({"language_threshold",
                                fmt::format("dominant script fraction {:.4f} < {:.4f} (latin {}, han {}, other {})",
                                            dominant, config.language_threshold, counts.latin, counts.han,
                                            counts.other),
                                0, doc.body.size()});
  }
  if (!decision.reasons.empty()) decision.verdict = Verdict::kReject;
  return decision;
}

bool is_valid_doi(std::string_view doi) {
  if (doi.size() < 3 || doi.substr(0, 3) != "10.") return false;
  std::size_t i = 3;
  std::size_t digits = 0;
  while (i < doi.size() && std::isdigit(static_cast<unsigned char>(doi[i]))) {
    ++i;
    ++digits;
  }
  if (digits < 4 || digits > 9) return false;
  if (i >= doi.size() || doi[i] != '/') return false;
  ++i;
  if (i >= doi.size()) return false;
  std::size_t pos = i;
  while (pos < doi.size()) {
    if (text::is_space(text::next_code_point(doi, pos))) return false;
  }
  return true;
}

FilterDecision validate_metadata(const Document& doc, const RequiredMetadata& required) {
  FilterDecision decision;
  if (required.abstract_nonempty && is_blank(doc.abstract_text)) {
    decision.reasons.push_back({"abstract_nonempty", "abstract is empty", 0, doc.abstract_text.size()});
  }
  if (required.doi_valid) {
    if (!doc.doi) {
      decision.reasons.push_back({"doi_valid", "doi is absent", 0, 0});
    } else if (!is_valid_doi(*doc.doi)) {
      decision.reasons.push_back({"doi_valid", "invalid doi \"" + *doc.doi + "\"", 0, doc.doi->size()});
    }
  }
  if (!decision.reasons.empty()) decision.verdict = Verdict::kReject;
  return decision;
}

std::string_view to_string(ClassifierLabel l) {
  switch (l) {
    case ClassifierLabel::kScientific: return "scientific";
    case ClassifierLabel::kNonScientific: return "non_scientific";
    case ClassifierLabel::kToxic: return "toxic";
  }
  return "?";
}

FixtureClassifier::FixtureClassifier(std::unordered_map<std::string, std::string> table,
                                     std::optional<std::string> default_label)
    : table_(std::move(table)), default_label_(std::move(default_label)) {}

FixtureClassifier FixtureClassifier::from_file(const std::filesystem::path& path,
                                               std::optional<std::string> default_label) {
  std::unordered_map<std::string, std::string> table;
  io::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty() || line.front() == '#') return;
    try {
      const json j = json::parse(line);
      table[j.at("id").get<std::string>()] = j.at("label").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}: {}", path.string(), n, e.what()));
    }
  });
  return FixtureClassifier(std::move(table), std::move(default_label));
}

std::string FixtureClassifier::classify(std::string_view id, std::string_view) {
  if (auto it = table_.find(std::string(id)); it != table_.end()) return it->second;
  if (default_label_) return *default_label_;
  throw Error(ErrorCode::kClassifierMalformedReply, "no fixture label for \"" + std::string(id) + "\"");
}

HttpClassifier::HttpClassifier(HttpEndpoint endpoint)
    : client_(std::move(endpoint), ErrorCode::kClassifierUnavailable) {}

std::string HttpClassifier::classify(std::string_view id, std::string_view text) {
  const json request = {{"id", id}, {"text", text}};
  const std::string reply = client_.post(request.dump(-1, ' ', false, json::error_handler_t::replace));
  try {
    const json j = json::parse(reply);
    return j.at("label").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kClassifierMalformedReply, e.what());
  }
}

ClassifierLabel classify_document(const Document& doc, ExternalClassifier& classifier) {
  std::string payload = doc.title;
  if (!doc.abstract_text.empty()) payload += "\n\n" + doc.abstract_text;
  payload += "\n\n" + doc.body;
  const std::string label = classifier.classify(doc.id, payload);
  if (label == "scientific") return ClassifierLabel::kScientific;
  if (label == "non_scientific") return ClassifierLabel::kNonScientific;
  if (label == "toxic") return ClassifierLabel::kToxic;
  throw Error(ErrorCode::kClassifierMalformedReply, "unknown label \"" + label + "\" for " + doc.id);
}

CleanOutcome clean_document(const Document& doc, const FilterConfig& config, ExternalClassifier* classifier) {
  CleanOutcome out{doc, {}, {}};
  if (is_blank(doc.body)) {
    out.decision.verdict = Verdict::kReject;
    out.decision.reasons.push_back({"empty_document", "body is blank", 0, doc.body.size()});
    return out;
  }
  out.decision = apply_rule_filters(doc, config);

  for (std::string* field : {&out.document.title, &out.document.abstract_text, &out.document.body}) {
    ScrubResult s = scrub_pii(*field, config.pii_patterns);
    *field = std::move(s.text);
    for (const auto& [name, n] : s.redactions) out.redactions[name] += n;
  }

  FilterDecision meta = validate_metadata(out.document, config.required_metadata);
  for (auto& r : meta.reasons) out.decision.reasons.push_back(std::move(r));

  if (out.decision.reasons.empty() && classifier != nullptr) {
    const ClassifierLabel label = classify_document(out.document, *classifier);
    if (label != ClassifierLabel::kScientific) {
      out.decision.reasons.push_back({"classifier", std::string(to_string(label)), 0, 0});
    }
  }
  out.decision.verdict = out.decision.reasons.empty() ? Verdict::kAccept : Verdict::kReject;
  return out;
}

}  // namespace scibench
