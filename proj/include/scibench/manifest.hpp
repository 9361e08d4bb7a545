#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scibench/records.hpp"

namespace scibench {

enum class CheckStatus { kPass, kWarn, kFail };
std::string_view to_string(CheckStatus s);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  std::string detail;

  bool operator==(const Check&) const = default;
};

struct ValidationReport {
  std::vector<Check> checks;
  std::uint64_t computed_total = 0;
  std::map<std::string, double> computed_proportions;

  bool has_failures() const;
  bool has_warnings() const;
  const Check* find(std::string_view name) const;
  bool operator==(const ValidationReport&) const = default;
};

struct ManifestRow {
  std::string domain;  // category key used by the proportion checks
  std::string task;
  std::optional<std::string> language;
  std::int64_t count = 0;
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;
  std::int64_t declared_total = 0;
  std::map<std::string, double> declared_proportions;
};

/// Parses the manifest JSON document (see docs/record_format.md).
DatasetManifest parse_manifest(std::string_view json_text);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Pure: every finding is a report entry. The total check fails on any
/// mismatch; proportion checks warn when |computed - declared| > tolerance.
/// A second total counts rows that share (domain, task) in several
/// languages once, reporting the larger language count.
ValidationReport validate_manifest(const DatasetManifest& manifest, double tolerance);

/// Fraction of pairs per domain; empty input gives an empty map.
std::map<Domain, double> category_distribution(const std::vector<InstructionPair>& pairs);

std::string render_report(const ValidationReport& report);

}  // namespace scibench
