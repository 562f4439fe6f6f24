#include "wikirel/report.h"

#include <fmt/format.h>

#include <charconv>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "wikirel/http.h"
#include "wikirel/strings.h"

namespace wikirel {

using nlohmann::ordered_json;

std::string format_score(double score) { return fmt::format("{:.6f}", score); }

namespace {

double rounded(double score) { return std::stod(format_score(score)); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote in CSV line");
  return fields;
}

}  // namespace

std::vector<ReportRow> rank_timeline_rows(const std::vector<ScoreSeries>& series,
                                          const std::string& scope, ModelId model, int top_k) {
  std::vector<const ScoreSeries*> selected;
  for (const auto& s : series) {
    if (s.model != model) continue;
    for (const auto& [_, rank] : s.monthly_rank) {
      if (rank <= top_k) {
        selected.push_back(&s);
        break;
      }
    }
  }
  std::vector<ReportRow> rows;
  for (const auto* s : selected) {
    for (const auto& [ym, rank] : s->monthly_rank) {
      rows.push_back({scope, ym, model, s->domain, rounded(s->monthly.at(ym)), rank});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.month, a.rank) < std::tie(b.month, b.rank);
  });
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.language) + ',' + r.month.to_string() + ',' +
           std::string(to_string(r.model)) + ',' + csv_field(r.domain) + ',' +
           format_score(r.score) + ',' + std::to_string(r.rank) + '\n';
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  std::vector<ReportRow> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line_no == 1) {
      if (line != kReportCsvHeader) throw std::invalid_argument("unexpected CSV header");
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 6) fail("expected 6 fields");
    ReportRow r;
    r.language = f[0];
    auto ym = YearMonth::parse(f[1]);
    if (!ym) fail("bad month '" + f[1] + "'");
    r.month = *ym;
    auto model = parse_model_id(f[2]);
    if (!model) fail("bad model '" + f[2] + "'");
    r.model = *model;
    r.domain = f[3];
    auto [p, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), r.rank);
    if (ec != std::errc() || p != f[5].data() + f[5].size()) fail("bad rank '" + f[5] + "'");
    try {
      std::size_t used = 0;
      r.score = std::stod(f[4], &used);
      if (used != f[4].size()) fail("bad score '" + f[4] + "'");
    } catch (const std::logic_error&) {
      fail("bad score '" + f[4] + "'");
    }
    rows.push_back(std::move(r));
  }
  if (line_no == 0) throw std::invalid_argument("empty CSV");
  return rows;
}

std::string rank_timeline_json(const std::vector<ReportRow>& rows, const std::string& scope,
                               ModelId model, int top_k) {
  std::set<YearMonth> month_set;
  std::set<std::string> domain_set;
  for (const auto& r : rows) {
    month_set.insert(r.month);
    domain_set.insert(r.domain);
  }
  std::vector<YearMonth> months(month_set.begin(), month_set.end());
  std::map<std::string, std::pair<ordered_json, ordered_json>> cells;
  for (const auto& d : domain_set) {
    cells[d] = {ordered_json::array(), ordered_json::array()};
    for (std::size_t i = 0; i < months.size(); ++i) {
      cells[d].first.push_back(nullptr);
      cells[d].second.push_back(nullptr);
    }
  }
  for (const auto& r : rows) {
    auto i = static_cast<std::size_t>(
        std::lower_bound(months.begin(), months.end(), r.month) - months.begin());
    cells[r.domain].first[i] = r.rank;
    cells[r.domain].second[i] = r.score;
  }
  ordered_json doc;
  doc["scope"] = scope;
  doc["model"] = std::string(to_string(model));
  doc["top_k"] = top_k;
  doc["months"] = ordered_json::array();
  for (const auto& m : months) doc["months"].push_back(m.to_string());
  doc["domains"] = ordered_json::array();
  for (auto& [domain, c] : cells) {
    ordered_json d;
    d["domain"] = domain;
    d["rank"] = std::move(c.first);
    d["score"] = std::move(c.second);
    doc["domains"].push_back(std::move(d));
  }
  return doc.dump(2) + "\n";
}

std::filesystem::path report_dir(const std::filesystem::path& output_dir, const std::string& scope,
                                 ModelId model) {
  return output_dir / "reports" / scope / std::string(to_string(model));
}

std::vector<ReportRow> emit_rank_timeline(const std::vector<ScoreSeries>& series,
                                          const std::string& scope, ModelId model, int top_k,
                                          const std::filesystem::path& output_dir,
                                          Diagnostics* warnings) {
  auto rows = rank_timeline_rows(series, scope, model, top_k);
  if (rows.empty() && warnings) {
    warnings->push_back({"empty-rank-timeline",
                         "no ranked domains for " + scope + "/" + std::string(to_string(model)), 0});
  }
  auto dir = report_dir(output_dir, scope, model);
  write_file_atomic(dir / "rank_timeline.csv", report_csv(rows));
  write_file_atomic(dir / "rank_timeline.json", rank_timeline_json(rows, scope, model, top_k));
  return rows;
}

LanguageHeatmap language_heatmap(const std::map<std::string, std::vector<ScoreSeries>>& per_language,
                                 ModelId model, int top_k) {
  LanguageHeatmap h;
  h.model = model;
  h.top_k = top_k;
  std::set<std::string> domains;
  // language index -> domain -> mean monthly rank
  std::vector<std::map<std::string, double>> means;
  for (const auto& [lang, series] : per_language) {
    h.languages.push_back(lang);
    auto& m = means.emplace_back();
    for (const auto& s : series) {
      if (s.model != model || s.monthly_rank.empty()) continue;
      std::vector<double> ranks;
      bool top = false;
      for (const auto& [_, r] : s.monthly_rank) {
        ranks.push_back(r);
        top = top || r <= top_k;
      }
      m[s.domain] = pairwise_sum(ranks) / static_cast<double>(ranks.size());
      if (top) domains.insert(s.domain);
    }
  }
  for (const auto& d : domains) {
    HeatmapRow row{d, {}};
    for (const auto& m : means) {
      auto it = m.find(d);
      row.average_rank.push_back(it == m.end() ? std::nullopt : std::optional<double>(it->second));
    }
    h.rows.push_back(std::move(row));
  }
  return h;
}

std::string heatmap_json(const LanguageHeatmap& h) {
  ordered_json doc;
  doc["model"] = std::string(to_string(h.model));
  doc["top_k"] = h.top_k;
  doc["languages"] = h.languages;
  doc["rows"] = ordered_json::array();
  for (const auto& r : h.rows) {
    ordered_json row;
    row["domain"] = r.domain;
    row["average_rank"] = ordered_json::array();
    for (const auto& v : r.average_rank) {
      if (v) row["average_rank"].push_back(*v);
      else row["average_rank"].push_back(nullptr);
    }
    doc["rows"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::filesystem::path emit_language_heatmap(
    const std::map<std::string, std::vector<ScoreSeries>>& per_language, ModelId model, int top_k,
    const std::filesystem::path& output_dir) {
  auto path = report_dir(output_dir, std::string(kAllLanguagesScope), model) / "language_heatmap.json";
  write_file_atomic(path, heatmap_json(language_heatmap(per_language, model, top_k)));
  return path;
}

}  // namespace wikirel
