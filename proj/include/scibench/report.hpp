#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace scibench {

struct MetricRow {
  std::string task_group;  // Sequence Labeling | Generation | Inference
  std::string dataset;
  double score_a = 0.0;
  std::optional<double> score_b;
  std::string metric_name;

  bool operator==(const MetricRow&) const = default;
};

struct MetricReport {
  std::string model_a = "model_a";
  std::string model_b = "model_b";
  std::vector<MetricRow> rows;
  std::vector<std::pair<std::string, std::string>> provenance;

  bool operator==(const MetricReport&) const = default;
};

/// Group display order.
const std::vector<std::string>& task_groups();

/// Names a report row may carry in its metric column.
const std::vector<std::string>& metric_registry();
bool is_registered_metric(std::string_view name);

enum class ReportFormat { kMarkdown, kCsv };
ReportFormat parse_report_format(std::string_view s);

/// Scores print with 4 decimals; rows are grouped by task_group in
/// task_groups() order, preserving row order within a group. A missing
/// model-b score prints as "-" (markdown) or an empty cell (csv).
/// Throws kEmptyReport when there are no rows, kInvalidConfig for an
/// unknown group or metric name.
std::string emit_report(const MetricReport& report, ReportFormat format);

/// Inverse of the csv emitter (scores come back rounded to 4 decimals).
MetricReport parse_report_csv(std::string_view csv);

/// {"model_a", "model_b", "rows": [{"task_group", "dataset", "score_a",
/// "score_b", "metric"}], "provenance": {...}}
MetricReport report_from_json(const nlohmann::json& j);
MetricReport load_report(const std::string& path);

}  // namespace scibench
