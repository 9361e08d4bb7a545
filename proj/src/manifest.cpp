#include "scibench/manifest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <utility>

#include "scibench/io.hpp"

namespace scibench {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kWarn: return "warn";
    case CheckStatus::kFail: return "fail";
  }
  return "?";
}

bool ValidationReport::has_failures() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.status == CheckStatus::kFail; });
}

bool ValidationReport::has_warnings() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.status == CheckStatus::kWarn; });
}

const Check* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

DatasetManifest parse_manifest(std::string_view json_text) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "manifest is not a JSON object");
  DatasetManifest m;
  try {
    if (!j.contains("rows")) throw Error(ErrorCode::kMissingRequiredField, "rows");
    for (const auto& r : j.at("rows")) {
      ManifestRow row;
      row.domain = r.at("domain").get<std::string>();
      row.task = r.value("task", std::string{});
      if (r.contains("language") && !r.at("language").is_null()) {
        row.language = r.at("language").get<std::string>();
      }
      row.count = r.at("count").get<std::int64_t>();
      m.rows.push_back(std::move(row));
    }
    if (!j.contains("declared_total")) throw Error(ErrorCode::kMissingRequiredField, "declared_total");
    m.declared_total = j.at("declared_total").get<std::int64_t>();
    if (j.contains("declared_proportions")) {
      for (const auto& [k, v] : j.at("declared_proportions").items()) {
        m.declared_proportions[k] = v.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidFieldValue, e.what());
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(io::read_file(path));
}

ValidationReport validate_manifest(const DatasetManifest& manifest, double tolerance) {
  ValidationReport report;

  std::vector<std::string> negative;
  std::map<std::string, std::int64_t> per_category;
  std::int64_t total = 0;
  // (domain, task) -> largest count over languages
  std::map<std::pair<std::string, std::string>, std::int64_t> per_task_max;
  for (const auto& row : manifest.rows) {
    if (row.count < 0) {
      negative.push_back(row.domain + "/" + row.task);
      continue;
    }
    total += row.count;
    per_category[row.domain] += row.count;
    auto& slot = per_task_max[{row.domain, row.task}];
    slot = std::max(slot, row.count);
  }
  report.checks.push_back({"counts_nonnegative",
                           negative.empty() ? CheckStatus::kPass : CheckStatus::kFail,
                           negative.empty() ? "all row counts >= 0"
                                            : fmt::format("negative counts in {}", fmt::join(negative, ", "))});

  report.computed_total = static_cast<std::uint64_t>(total);
  const std::int64_t diff = total - manifest.declared_total;
  report.checks.push_back(
      {"total", diff == 0 ? CheckStatus::kPass : CheckStatus::kFail,
       fmt::format("computed {} vs declared {} (difference {:+})", total, manifest.declared_total, diff)});

  std::int64_t once_total = 0;
  for (const auto& [key, count] : per_task_max) once_total += count;
  report.checks.push_back(
      {"total_multilingual_counted_once",
       once_total == manifest.declared_total ? CheckStatus::kPass : CheckStatus::kWarn,
       fmt::format("computed {} vs declared {} when each (domain, task) counts its largest language row only",
                   once_total, manifest.declared_total)});

  if (total > 0) {
    for (const auto& [category, count] : per_category) {
      report.computed_proportions[category] = static_cast<double>(count) / static_cast<double>(total);
    }
  }

  if (!manifest.declared_proportions.empty()) {
    double sum = 0.0;
    for (const auto& [k, v] : manifest.declared_proportions) sum += v;
    const bool sums_to_one = std::abs(sum - 1.0) <= 1e-9;
    report.checks.push_back({"declared_proportions_sum", sums_to_one ? CheckStatus::kPass : CheckStatus::kFail,
                             fmt::format("declared proportions sum to {:.12f}", sum)});

    for (const auto& [category, declared] : manifest.declared_proportions) {
      auto it = report.computed_proportions.find(category);
      const double computed = it == report.computed_proportions.end() ? 0.0 : it->second;
      const double delta = std::abs(computed - declared);
      report.checks.push_back({"proportion:" + category,
                               delta > tolerance ? CheckStatus::kWarn : CheckStatus::kPass,
                               fmt::format("computed {:.6f} vs declared {:.6f} (|delta| {:.6f}, tolerance {})",
                                           computed, declared, delta, tolerance)});
    }
  }
  return report;
}

std::map<Domain, double> category_distribution(const std::vector<InstructionPair>& pairs) {
  std::map<Domain, double> out;
  if (pairs.empty()) return out;
  std::map<Domain, std::size_t> counts;
  for (const auto& p : pairs) ++counts[p.domain];
  for (const auto& [d, n] : counts) {
    out[d] = static_cast<double>(n) / static_cast<double>(pairs.size());
  }
  return out;
}

std::string render_report(const ValidationReport& report) {
  std::string out;
  for (const auto& c : report.checks) {
    out += fmt::format("[{}] {}: {}\n", to_string(c.status), c.name, c.detail);
  }
  out += fmt::format("computed_total = {}\n", report.computed_total);
  for (const auto& [k, v] : report.computed_proportions) {
    out += fmt::format("proportion[{}] = {:.6f}\n", k, v);
  }
  return out;
}

}  // namespace scibench
