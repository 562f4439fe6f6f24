#include <json.hpp>

#include "wikirel/ingest.h"

namespace wikirel {

using nlohmann::json;

SourceCounts count_sources(const std::vector<ReferenceOccurrence>& occurrences,
                           const PslRuleSet& rules, DiagnosticTally* tally) {
  SourceCounts c;
  for (const auto& occ : occurrences) {
    for (const auto& url : occ.urls) {
      ++c.total_refs;
      auto r = resolve_source(url, rules);
      if (r.resolved()) {
        ++c.domain_counts[r.source.domain];
      } else if (tally) {
        tally->add(r.status == ResolveStatus::kPublicSuffix ? "public-suffix-host" : "invalid-url");
      }
    }
  }
  return c;
}

namespace {

// Index of the last time <= end of `day`, or npos.
std::size_t index_for_day(const std::vector<Timestamp>& sorted, Date day) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), end_of_day(day));
  if (it == sorted.begin()) return std::string::npos;
  return static_cast<std::size_t>(std::prev(it) - sorted.begin());
}

}  // namespace

std::vector<std::size_t> revisions_needed(const std::vector<Timestamp>& sorted, DateRange calendar) {
  std::vector<std::size_t> out;
  for (Date d = calendar.from; d <= calendar.to; d = d.next()) {
    auto i = index_for_day(sorted, d);
    if (i != std::string::npos && (out.empty() || out.back() != i)) out.push_back(i);
  }
  return out;
}

std::vector<ArticleDaySnapshot> build_snapshots(const std::vector<ArticleHistory>& histories,
                                                const std::vector<PageViewRecord>& pageviews,
                                                DateRange calendar) {
  std::map<std::pair<std::string, Date>, const PageViewRecord*> views;
  for (const auto& r : pageviews) views[{r.title, r.date}] = &r;

  std::vector<ArticleDaySnapshot> out;
  for (const auto& h : histories) {
    for (Date d = calendar.from; d <= calendar.to; d = d.next()) {
      auto i = index_for_day(h.revision_times, d);
      if (i == std::string::npos) continue;
      ArticleDaySnapshot s;
      s.article_id = h.article_id;
      s.date = d;
      s.total_refs = h.counts.at(i).total_refs;
      s.domain_counts = h.counts.at(i).domain_counts;
      if (auto it = views.find({h.article_id, d}); it != views.end()) {
        s.views_all = it->second->views_all;
        s.views_human = it->second->views_human;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string snapshots_to_json(const std::vector<ArticleDaySnapshot>& snapshots) {
  json arr = json::array();
  for (const auto& s : snapshots) {
    arr.push_back({{"article_id", s.article_id},
                   {"date", s.date.to_string()},
                   {"total_refs", s.total_refs},
                   {"domain_counts", s.domain_counts},
                   {"views_all", s.views_all},
                   {"views_human", s.views_human}});
  }
  return arr.dump(1) + "\n";
}

std::vector<ArticleDaySnapshot> snapshots_from_json(std::string_view text) {
  std::vector<ArticleDaySnapshot> out;
  for (const auto& j : json::parse(text)) {
    ArticleDaySnapshot s;
    s.article_id = j.at("article_id").get<std::string>();
    auto d = Date::parse(j.at("date").get<std::string>());
    if (!d) throw std::runtime_error("bad date in snapshots");
    s.date = *d;
    s.total_refs = j.at("total_refs").get<std::int64_t>();
    s.domain_counts = j.at("domain_counts").get<std::map<std::string, std::int64_t>>();
    s.views_all = j.at("views_all").get<std::int64_t>();
    s.views_human = j.at("views_human").get<std::int64_t>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wikirel
