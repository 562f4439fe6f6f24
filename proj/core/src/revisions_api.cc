#include <algorithm>
#include <deque>
#include <json.hpp>

#include "wikirel/ingest.h"
#include "wikirel/strings.h"
#include "wikirel/wikimarkup.h"

namespace wikirel {

using nlohmann::json;

namespace {

std::string query_url(const std::string& api, const std::string& title, const std::string& extra) {
  return api + "?action=query&format=json&formatversion=2&prop=revisions&titles=" +
         percent_encode(title) + "&rvprop=" + percent_encode("ids|timestamp|content") +
         "&rvslots=main" + extra;
}

json get_json(HttpClient& http, const std::string& url) {
  auto res = http.get(url);
  if (res.status != 200) throw HttpError("HTTP " + std::to_string(res.status) + " for " + url, res.status);
  auto doc = json::parse(res.body, nullptr, false);
  if (doc.is_discarded()) throw HttpError("malformed JSON from " + url);
  if (doc.contains("error")) {
    throw HttpError("API error " + doc["error"].value("code", "") + " for " + url);
  }
  return doc;
}

// Appends the revisions of the single page in `doc`. Returns false when the
// page does not exist.
bool collect(const json& doc, const std::string& article, const std::string& language,
             std::vector<RevisionText>& out) {
  const auto& pages = doc.at("query").at("pages");
  if (pages.empty()) return false;
  const auto& page = pages.at(0);
  if (page.value("missing", false) || page.value("invalid", false)) return false;
  for (const auto& r : page.value("revisions", json::array())) {
    auto ts = parse_timestamp(r.at("timestamp").get<std::string>());
    if (!ts) throw HttpError("bad revision timestamp for " + article);
    std::string text;
    if (r.contains("slots")) {
      const auto& main = r.at("slots").at("main");
      text = main.value("content", "");
    }
    out.push_back(RevisionText{article, language, *ts, std::move(text)});
  }
  return true;
}

}  // namespace

RevisionFetch fetch_revisions_api(HttpClient& http, const std::string& api_endpoint,
                                  const std::string& language, const std::string& title,
                                  DateRange window) {
  RevisionFetch result;
  const auto start = start_of_day(window.from);
  const auto end = end_of_day(window.to);

  std::vector<RevisionText> before;
  auto doc = get_json(http, query_url(api_endpoint, title,
                                      "&rvlimit=1&rvdir=older&rvstart=" +
                                          format_timestamp(start - std::chrono::seconds{1})));
  if (!collect(doc, title, language, before)) {
    result.diagnostics.push_back({"article-missing", language + ":" + title + " does not exist", 0});
    return result;
  }
  result.revisions = std::move(before);

  std::string cont;
  for (;;) {
    std::string extra = "&rvlimit=50&rvdir=newer&rvstart=" + format_timestamp(start) +
                        "&rvend=" + format_timestamp(end);
    if (!cont.empty()) extra += "&rvcontinue=" + percent_encode(cont);
    doc = get_json(http, query_url(api_endpoint, title, extra));
    collect(doc, title, language, result.revisions);
    if (!doc.contains("continue") || !doc["continue"].contains("rvcontinue")) break;
    auto next = doc["continue"]["rvcontinue"].get<std::string>();
    if (next == cont) break;
    cont = std::move(next);
  }
  result.revisions = select_window(std::move(result.revisions), window);
  return result;
}

TemplateHistories fetch_templates_api(HttpClient& http, const std::string& api_endpoint,
                                      const std::string& language,
                                      const std::vector<std::string>& texts, DateRange window,
                                      int max_depth, const std::set<std::string>& skip) {
  TemplateHistories out;
  std::set<std::string> seen(skip.begin(), skip.end());
  std::deque<std::pair<std::string, int>> queue;
  auto enqueue_from = [&](std::string_view text, int level) {
    for (const auto& call : find_template_calls(strip_comments(text))) {
      if (!call.name.empty() && seen.insert(call.name).second) queue.emplace_back(call.name, level);
    }
    auto t = trim(text);
    if (istarts_with(t, "#redirect")) {
      auto open = t.find("[["), close = t.find("]]");
      if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
        auto target = t.substr(open + 2, close - open - 2);
        if (auto colon = target.find(':'); colon != std::string_view::npos) {
          target = target.substr(colon + 1);
        }
        auto name = canonical_template_name(target);
        if (!name.empty() && seen.insert(name).second) queue.emplace_back(name, level);
      }
    }
  };
  for (const auto& t : texts) enqueue_from(t, 1);
  while (!queue.empty()) {
    auto [name, level] = queue.front();
    queue.pop_front();
    auto fetched = fetch_revisions_api(http, api_endpoint, language, "Template:" + name, window);
    if (fetched.revisions.empty()) continue;
    auto& dst = out[name];
    for (auto& r : fetched.revisions) {
      if (level < max_depth) enqueue_from(r.wikitext, level + 1);
      dst.emplace_back(r.timestamp, std::move(r.wikitext));
    }
  }
  return out;
}

std::filesystem::path RevisionCache::path_for(const std::string& language, const std::string& title,
                                              DateRange window) const {
  return dir_ / "revisions" / language /
         (hex64(fnv1a64(title)) + "_" + window.from.compact() + "_" + window.to.compact() + ".json");
}

std::optional<std::vector<RevisionText>> RevisionCache::load(const std::string& language,
                                                             const std::string& title,
                                                             DateRange window) const {
  auto text = read_file(path_for(language, title, window));
  if (!text) return std::nullopt;
  auto doc = json::parse(*text, nullptr, false);
  if (doc.is_discarded() || doc.value("title", "") != title) return std::nullopt;
  return revisions_from_json(doc.at("revisions").dump());
}

void RevisionCache::store(const std::string& language, const std::string& title, DateRange window,
                          const std::vector<RevisionText>& revisions) const {
  json doc{{"language", language},
           {"title", title},
           {"from", window.from.to_string()},
           {"to", window.to.to_string()},
           {"revisions", json::parse(revisions_to_json(revisions))}};
  write_file_atomic(path_for(language, title, window),
                    doc.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::string revisions_to_json(const std::vector<RevisionText>& revisions) {
  json arr = json::array();
  for (const auto& r : revisions) {
    arr.push_back({{"article_id", r.article_id},
                   {"language", r.language},
                   {"timestamp", format_timestamp(r.timestamp)},
                   {"wikitext", r.wikitext}});
  }
  return arr.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<RevisionText> revisions_from_json(std::string_view text) {
  auto arr = json::parse(text);
  std::vector<RevisionText> out;
  for (const auto& j : arr) {
    auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) throw std::runtime_error("bad timestamp in revision cache");
    out.push_back(RevisionText{j.at("article_id").get<std::string>(),
                               j.at("language").get<std::string>(), *ts,
                               j.at("wikitext").get<std::string>()});
  }
  return out;
}

std::vector<std::string> fetch_embeddedin(HttpClient& http, const std::string& api_endpoint,
                                          const std::string& template_title, int ns) {
  std::vector<std::string> out;
  std::string cont;
  for (;;) {
    auto url = api_endpoint +
               "?action=query&format=json&formatversion=2&list=embeddedin&eititle=" +
               percent_encode(template_title) + "&einamespace=" + std::to_string(ns) +
               "&eilimit=500";
    if (!cont.empty()) url += "&eicontinue=" + percent_encode(cont);
    auto doc = get_json(http, url);
    for (const auto& p : doc.at("query").value("embeddedin", json::array())) {
      out.push_back(normalize_title(p.at("title").get<std::string>()));
    }
    if (!doc.contains("continue") || !doc["continue"].contains("eicontinue")) break;
    auto next = doc["continue"]["eicontinue"].get<std::string>();
    if (next == cont) break;
    cont = std::move(next);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<std::string, std::string> fetch_latest_texts(HttpClient& http,
                                                      const std::string& api_endpoint,
                                                      const std::vector<std::string>& titles) {
  constexpr std::size_t kBatch = 50;
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < titles.size(); i += kBatch) {
    std::vector<std::string> batch(titles.begin() + i,
                                   titles.begin() + std::min(titles.size(), i + kBatch));
    auto url = api_endpoint +
               "?action=query&format=json&formatversion=2&prop=revisions&titles=" +
               percent_encode(join(batch, "|")) + "&rvprop=content&rvslots=main";
    auto doc = get_json(http, url);
    for (const auto& page : doc.at("query").value("pages", json::array())) {
      if (page.value("missing", false) || !page.contains("revisions")) continue;
      const auto& revs = page.at("revisions");
      if (revs.empty() || !revs.at(0).contains("slots")) continue;
      out[normalize_title(page.at("title").get<std::string>())] =
          revs.at(0).at("slots").at("main").value("content", "");
    }
  }
  return out;
}

}  // namespace wikirel
