#include "scibench/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "scibench/error.hpp"
#include "scibench/io.hpp"

namespace scibench {

using json = nlohmann::json;

namespace {

std::string score_cell(double v) { return fmt::format("{:.4f}", v); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string single_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

// Splits csv text into records of fields, honoring quoted fields.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r': break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default: field += c; any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kMalformedRecord, "unterminated quoted csv field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_score(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kMalformedRecord, "score cell \"" + s + "\" is not a number");
  }
  return v;
}

std::vector<const MetricRow*> grouped_rows(const MetricReport& report) {
  const auto& groups = task_groups();
  std::vector<const MetricRow*> rows;
  for (const auto& g : groups) {
    for (const auto& r : report.rows) {
      if (r.task_group == g) rows.push_back(&r);
    }
  }
  return rows;
}

void check_report(const MetricReport& report) {
  if (report.rows.empty()) throw Error(ErrorCode::kEmptyReport, "report has no rows");
  const auto& groups = task_groups();
  for (const auto& r : report.rows) {
    if (std::find(groups.begin(), groups.end(), r.task_group) == groups.end()) {
      throw Error(ErrorCode::kInvalidConfig, "unknown task group \"" + r.task_group + "\"");
    }
    if (!is_registered_metric(r.metric_name)) {
      throw Error(ErrorCode::kInvalidConfig, "metric \"" + r.metric_name + "\" is not registered");
    }
  }
}

}  // namespace

const std::vector<std::string>& task_groups() {
  static const std::vector<std::string> kGroups{"Sequence Labeling", "Generation", "Inference"};
  return kGroups;
}

const std::vector<std::string>& metric_registry() {
  static const std::vector<std::string> kNames{"F1", "Rouge", "BLEU", "Accuracy", "Coherence Score"};
  return kNames;
}

bool is_registered_metric(std::string_view name) {
  const auto& names = metric_registry();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "markdown") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kInvalidConfig, "format must be markdown or csv, got \"" + std::string(s) + "\"");
}

std::string emit_report(const MetricReport& report, ReportFormat format) {
  check_report(report);
  const auto rows = grouped_rows(report);
  std::string out;
  if (format == ReportFormat::kCsv) {
    for (const auto& [k, v] : report.provenance) out += "# " + single_line(k) + ": " + single_line(v) + "\n";
    out += fmt::format("task_group,dataset,{},{},metric_name\n", csv_field(report.model_a),
                       csv_field(report.model_b));
    for (const MetricRow* r : rows) {
      out += fmt::format("{},{},{},{},{}\n", csv_field(r->task_group), csv_field(r->dataset), score_cell(r->score_a),
                         r->score_b ? score_cell(*r->score_b) : std::string(), csv_field(r->metric_name));
    }
    return out;
  }

  for (const auto& [k, v] : report.provenance) out += "<!-- " + single_line(k) + ": " + single_line(v) + " -->\n";
  out += fmt::format("| Task | Dataset | {} | {} | Evaluation Metrics |\n", report.model_a, report.model_b);
  out += "|---|---|---:|---:|---|\n";
  std::string_view current;
  for (const MetricRow* r : rows) {
    const bool first = r->task_group != current;
    current = r->task_group;
    out += fmt::format("| {} | {} | {} | {} | {} |\n", first ? r->task_group : std::string(), r->dataset,
                       score_cell(r->score_a), r->score_b ? score_cell(*r->score_b) : std::string("-"),
                       r->metric_name);
  }
  return out;
}

MetricReport parse_report_csv(std::string_view csv) {
  MetricReport report;
  std::string body;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    std::string_view line = csv.substr(pos, nl - pos);
    if (line.substr(0, 2) == "# ") {
      std::string_view kv = line.substr(2);
      if (!kv.empty() && kv.back() == '\r') kv.remove_suffix(1);
      const std::size_t colon = kv.find(": ");
      if (colon == std::string_view::npos) throw Error(ErrorCode::kMalformedRecord, "bad provenance line");
      report.provenance.emplace_back(std::string(kv.substr(0, colon)), std::string(kv.substr(colon + 2)));
      pos = nl + 1;
      continue;
    }
    body = std::string(csv.substr(pos));
    break;
  }
  const auto rows = parse_csv_rows(body);
  if (rows.empty()) throw Error(ErrorCode::kMalformedRecord, "csv has no header");
  const auto& header = rows.front();
  if (header.size() != 5 || header[0] != "task_group" || header[1] != "dataset" || header[4] != "metric_name") {
    throw Error(ErrorCode::kMalformedRecord, "unexpected csv header");
  }
  report.model_a = header[2];
  report.model_b = header[3];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 5) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("csv row {} has {} fields", i + 1, f.size()));
    }
    MetricRow r{f[0], f[1], parse_score(f[2]), std::nullopt, f[4]};
    if (!f[3].empty()) r.score_b = parse_score(f[3]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

MetricReport report_from_json(const json& j) {
  MetricReport report;
  try {
    report.model_a = j.value("model_a", report.model_a);
    report.model_b = j.value("model_b", report.model_b);
    for (const auto& r : j.at("rows")) {
      MetricRow row{r.at("task_group").get<std::string>(), r.at("dataset").get<std::string>(),
                    r.at("score_a").get<double>(), std::nullopt, r.at("metric").get<std::string>()};
      if (r.contains("score_b") && !r.at("score_b").is_null()) row.score_b = r.at("score_b").get<double>();
      report.rows.push_back(std::move(row));
    }
    if (j.contains("provenance")) {
      for (const auto& [k, v] : j.at("provenance").items()) {
        report.provenance.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("report: ") + e.what());
  }
  return report;
}

MetricReport load_report(const std::string& path) {
  const std::string text = io::read_file(path);
  if (std::filesystem::path(path).extension() == ".csv") return parse_report_csv(text);
  try {
    return report_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, path + ": " + e.what());
  }
}

}  // namespace scibench
