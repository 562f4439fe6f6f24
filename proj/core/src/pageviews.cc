#include <charconv>
#include <json.hpp>

#include "wikirel/ingest.h"
#include "wikirel/sql_dump.h"
#include "wikirel/strings.h"

namespace wikirel {

using nlohmann::json;

namespace {

// Language of a Wikipedia project code ("en", "en.m", "en.wikipedia",
// "en.m.wikipedia"); empty for other projects.
std::string_view project_language(std::string_view code) {
  if (code.ends_with(".wikipedia")) code.remove_suffix(10);
  if (code.ends_with(".m")) code.remove_suffix(2);
  if (code.empty() || code.find('.') != std::string_view::npos) return {};
  return code;
}

std::optional<std::int64_t> parse_count(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

}  // namespace

HourlyPageviewIngester::HourlyPageviewIngester(const std::vector<CorpusSpec>& corpora,
                                               DateRange window)
    : window_(window) {
  for (const auto& corpus : corpora) {
    auto& titles = lookup_[corpus.language];
    for (const auto& [title, article] : corpus.articles) {
      titles[title_to_key(title)] = title;
      for (const auto& alt : article.alternative_titles) {
        titles.emplace(title_to_key(normalize_title(alt)), title);
      }
    }
  }
}

void HourlyPageviewIngester::ingest(std::istream& lines, Date day) {
  if (!window_.contains(day)) return;
  std::string line;
  std::string_view fields[4];
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::size_t n = 0;
    while (!rest.empty() && n < 5) {
      auto sp = rest.find(' ');
      if (n == 4) {
        ++n;
        break;
      }
      fields[n++] = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    }
    if (n != 4 || fields[1].empty()) {
      diagnostics_.add("malformed-pageview-line");
      continue;
    }
    auto count = parse_count(fields[2]);
    if (!count) {
      diagnostics_.add("malformed-pageview-line");
      continue;
    }
    auto lang = project_language(fields[0]);
    if (lang.empty()) continue;
    auto project = lookup_.find(lang);
    if (project == lookup_.end()) continue;
    auto it = project->second.find(fields[1]);
    if (it == project->second.end()) {
      auto decoded = title_to_key(normalize_title(percent_decode(fields[1])));
      it = project->second.find(decoded);
      if (it == project->second.end()) continue;
    }
    counts_[{std::string(lang), it->second, day}] += *count;
    matched_views_ += *count;
  }
}

std::optional<Date> date_from_pageview_filename(std::string_view name) {
  auto slash = name.find_last_of('/');
  if (slash != std::string_view::npos) name = name.substr(slash + 1);
  auto dash = name.find('-');
  if (dash == std::string_view::npos || name.size() < dash + 9) return std::nullopt;
  return Date::parse(name.substr(dash + 1, 8));
}

void HourlyPageviewIngester::ingest_file(const std::filesystem::path& path) {
  auto day = date_from_pageview_filename(path.filename().string());
  if (!day) throw std::runtime_error("no date in pageview file name " + path.string());
  InputFile file(path.string());
  ingest(file.stream(), *day);
}

std::vector<PageViewRecord> HourlyPageviewIngester::records() const {
  std::vector<PageViewRecord> out;
  out.reserve(counts_.size());
  for (const auto& [key, views] : counts_) {
    const auto& [lang, title, day] = key;
    out.push_back(PageViewRecord{lang, title, day, views, 0, ViewSource::kDump});
  }
  return out;
}

std::string pageview_api_url(const std::string& base, const std::string& language,
                             const std::string& title, const std::string& agent, DateRange window) {
  return base + "/per-article/" + language + ".wikipedia/all-access/" + agent + "/" +
         percent_encode(title_to_key(title)) + "/daily/" + window.from.compact() + "00/" +
         window.to.compact() + "00";
}

std::vector<PageViewRecord> fetch_pageviews_api(HttpClient& http, const std::string& base,
                                                const std::string& language,
                                                const CorpusArticle& article, DateRange window) {
  std::vector<std::string> titles{article.title};
  titles.insert(titles.end(), article.alternative_titles.begin(), article.alternative_titles.end());
  std::map<Date, std::int64_t> all, human;
  for (const auto& [agent, sums] : {std::pair{"all-agents", &all}, std::pair{"user", &human}}) {
    for (const auto& title : titles) {
      auto url = pageview_api_url(base, language, title, agent, window);
      auto res = http.get(url);
      if (res.status == 404) continue;
      if (res.status != 200) {
        throw HttpError("HTTP " + std::to_string(res.status) + " for " + url, res.status);
      }
      auto doc = json::parse(res.body);
      for (const auto& item : doc.value("items", json::array())) {
        auto ts = item.at("timestamp").get<std::string>();
        auto day = Date::parse(std::string_view(ts).substr(0, 8));
        if (!day || !window.contains(*day)) continue;
        (*sums)[*day] += item.at("views").get<std::int64_t>();
      }
    }
  }
  std::vector<PageViewRecord> out;
  for (Date d = window.from; d <= window.to; d = d.next()) {
    out.push_back(PageViewRecord{language, article.title, d, all[d], human[d], ViewSource::kApi});
  }
  return out;
}

std::string pageviews_to_json(const std::vector<PageViewRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"language", r.language},
                   {"title", r.title},
                   {"date", r.date.to_string()},
                   {"views_all", r.views_all},
                   {"views_human", r.views_human},
                   {"source", r.source == ViewSource::kApi ? "api" : "dump"}});
  }
  return arr.dump(1) + "\n";
}

std::vector<PageViewRecord> pageviews_from_json(std::string_view text) {
  std::vector<PageViewRecord> out;
  for (const auto& j : json::parse(text)) {
    auto d = Date::parse(j.at("date").get<std::string>());
    if (!d) throw std::runtime_error("bad date in pageview records");
    out.push_back(PageViewRecord{j.at("language").get<std::string>(), j.at("title").get<std::string>(),
                                 *d, j.at("views_all").get<std::int64_t>(),
                                 j.at("views_human").get<std::int64_t>(),
                                 j.at("source").get<std::string>() == "api" ? ViewSource::kApi
                                                                            : ViewSource::kDump});
  }
  return out;
}

}  // namespace wikirel
