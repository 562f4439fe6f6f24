#ifndef WIKIREL_REPORT_H_
#define WIKIREL_REPORT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikirel/diagnostics.h"
#include "wikirel/score.h"

namespace wikirel {

inline constexpr std::string_view kAllLanguagesScope = "all";
inline constexpr std::string_view kReportCsvHeader = "language,month,model,domain,score,rank";

struct ReportRow {
  std::string language;  // language code or "all"
  YearMonth month;
  ModelId model = ModelId::kF;
  std::string domain;
  double score = 0;  // rounded to 6 decimals, as written
  int rank = 0;

  bool operator==(const ReportRow&) const = default;
};

// Rows of the domains ranked within `top_k` in at least one month, by month
// then rank. Ranks are those among all domains of the month.
std::vector<ReportRow> rank_timeline_rows(const std::vector<ScoreSeries>& series,
                                          const std::string& scope, ModelId model, int top_k);

std::string format_score(double score);
std::string report_csv(const std::vector<ReportRow>& rows);
// Throws std::invalid_argument on malformed input.
std::vector<ReportRow> parse_report_csv(std::string_view text);

// Plot-ready form: months as columns, one rank and score array per domain
// with null for months the domain is not ranked.
std::string rank_timeline_json(const std::vector<ReportRow>& rows, const std::string& scope,
                               ModelId model, int top_k);

// <output>/reports/<scope>/<model>/
std::filesystem::path report_dir(const std::filesystem::path& output_dir, const std::string& scope,
                                 ModelId model);

// Writes rank_timeline.csv and rank_timeline.json. An empty selection gives
// a header-only CSV and a "empty-rank-timeline" warning.
std::vector<ReportRow> emit_rank_timeline(const std::vector<ScoreSeries>& series,
                                          const std::string& scope, ModelId model, int top_k,
                                          const std::filesystem::path& output_dir,
                                          Diagnostics* warnings = nullptr);

struct HeatmapRow {
  std::string domain;
  std::vector<std::optional<double>> average_rank;  // parallel to languages

  bool operator==(const HeatmapRow&) const = default;
};

struct LanguageHeatmap {
  ModelId model = ModelId::kF;
  int top_k = 10;
  std::vector<std::string> languages;
  std::vector<HeatmapRow> rows;  // by domain

  bool operator==(const LanguageHeatmap&) const = default;
};

// Domains within `top_k` in some month of some language, with the mean of
// their monthly ranks per language (null where never ranked).
LanguageHeatmap language_heatmap(const std::map<std::string, std::vector<ScoreSeries>>& per_language,
                                 ModelId model, int top_k = 10);

std::string heatmap_json(const LanguageHeatmap& heatmap);

// Writes <output>/reports/all/<model>/language_heatmap.json.
std::filesystem::path emit_language_heatmap(
    const std::map<std::string, std::vector<ScoreSeries>>& per_language, ModelId model, int top_k,
    const std::filesystem::path& output_dir);

}  // namespace wikirel

#endif  // WIKIREL_REPORT_H_
