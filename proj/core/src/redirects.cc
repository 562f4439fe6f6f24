#include <json.hpp>

#include "wikirel/ingest.h"
#include "wikirel/sql_dump.h"
#include "wikirel/strings.h"

namespace wikirel {

using nlohmann::json;

std::string RedirectMap::canonical(std::string_view title) const {
  auto key = normalize_title(title);
  auto it = map_.find(key);
  return it == map_.end() ? key : it->second;
}

RedirectMap build_redirect_map(const CorpusSpec& corpus,
                               const std::map<std::string, std::string>& redirect_edges,
                               Diagnostics* diagnostics) {
  std::map<std::string, std::string> edges;
  for (const auto& [from, to] : redirect_edges) edges[normalize_title(from)] = normalize_title(to);

  std::set<std::string> in_cycle;
  for (const auto& [start, _] : edges) {
    if (in_cycle.count(start)) continue;
    std::vector<std::string> path{start};
    std::string cur = start;
    for (;;) {
      auto it = edges.find(cur);
      if (it == edges.end()) break;
      cur = it->second;
      auto seen = std::find(path.begin(), path.end(), cur);
      if (seen != path.end()) {
        for (auto p = seen; p != path.end(); ++p) in_cycle.insert(*p);
        break;
      }
      path.push_back(cur);
    }
  }
  if (diagnostics) {
    for (const auto& t : in_cycle) {
      diagnostics->push_back({"redirect-cycle", "redirect cycle through " + t, 0});
    }
  }

  RedirectMap map;
  for (const auto& [alt, first] : edges) {
    if (in_cycle.count(alt) || corpus.articles.count(alt)) continue;
    std::string cur = first;
    int hops = 1;
    while (!corpus.articles.count(cur) && hops < kMaxRedirectHops) {
      auto it = edges.find(cur);
      if (it == edges.end() || in_cycle.count(cur)) break;
      cur = it->second;
      ++hops;
    }
    if (corpus.articles.count(cur)) map.set(alt, cur);
  }
  return map;
}

void apply_alternative_titles(CorpusSpec& corpus, const RedirectMap& redirects) {
  for (const auto& [alt, canonical] : redirects.entries()) {
    auto it = corpus.articles.find(canonical);
    if (it != corpus.articles.end()) it->second.alternative_titles.insert(alt);
  }
}

std::map<std::string, std::string> load_redirect_edges(std::istream& page_dump,
                                                       std::istream& redirect_dump) {
  std::unordered_map<PageId, std::string> redirect_pages;
  SqlRow row;
  SqlInsertReader pages(page_dump, "page");
  while (pages.next(row)) {
    if (row.size() < 3 || !row[0] || !row[1] || !row[2]) continue;
    if (*row[1] != "0") continue;
    if (row.size() > 4 && row[4] && *row[4] != "1") continue;
    redirect_pages[std::stoll(*row[0])] = normalize_title(*row[2]);
  }
  std::map<std::string, std::string> edges;
  SqlInsertReader redirects(redirect_dump, "redirect");
  while (redirects.next(row)) {
    if (row.size() < 3 || !row[0] || !row[1] || !row[2] || *row[1] != "0") continue;
    if (row.size() > 3 && row[3] && !row[3]->empty()) continue;  // interwiki
    auto it = redirect_pages.find(std::stoll(*row[0]));
    if (it == redirect_pages.end()) continue;
    edges[it->second] = normalize_title(*row[2]);
  }
  return edges;
}

std::vector<std::string> fetch_redirects_api(HttpClient& http, const std::string& api_endpoint,
                                             const std::string& title) {
  std::vector<std::string> out;
  std::string cont;
  for (;;) {
    auto url = api_endpoint +
               "?action=query&format=json&formatversion=2&prop=redirects&titles=" +
               percent_encode(title) + "&rdnamespace=0&rdlimit=max";
    if (!cont.empty()) url += "&rdcontinue=" + percent_encode(cont);
    auto res = http.get(url);
    if (res.status != 200) throw HttpError("HTTP " + std::to_string(res.status) + " for " + url, res.status);
    auto doc = json::parse(res.body);
    for (const auto& page : doc.at("query").at("pages")) {
      for (const auto& r : page.value("redirects", json::array())) {
        out.push_back(normalize_title(r.at("title").get<std::string>()));
      }
    }
    if (!doc.contains("continue") || !doc["continue"].contains("rdcontinue")) break;
    auto next = doc["continue"]["rdcontinue"].get<std::string>();
    if (next == cont) break;
    cont = std::move(next);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace wikirel
