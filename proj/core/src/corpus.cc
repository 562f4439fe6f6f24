#include "wikirel/corpus.h"

#include <deque>
#include <json.hpp>

#include "wikirel/sql_dump.h"
#include "wikirel/strings.h"
#include "wikirel/wikimarkup.h"

namespace wikirel {

using nlohmann::json;

void CategoryGraph::add_page(PageId id, std::string_view title, int ns) {
  auto normalized = normalize_title(title);
  if (ns == kCategoryNamespace) category_pages_.insert(normalized);
  pages_[id] = PageInfo{std::move(normalized), ns};
}

void CategoryGraph::add_membership(PageId member, std::string_view category) {
  auto key = normalize_title(category);
  auto it = membership_.find(key);
  if (it == membership_.end()) it = membership_.emplace(std::move(key), std::set<PageId>{}).first;
  it->second.insert(member);
}

const PageInfo* CategoryGraph::page(PageId id) const {
  auto it = pages_.find(id);
  return it == pages_.end() ? nullptr : &it->second;
}

const std::set<PageId>* CategoryGraph::members(std::string_view category) const {
  auto it = membership_.find(category);
  return it == membership_.end() ? nullptr : &it->second;
}

bool CategoryGraph::has_category(std::string_view category) const {
  return category_pages_.count(category) > 0 || membership_.count(category) > 0;
}

namespace {

std::optional<long long> to_int(const std::optional<std::string>& v) {
  if (!v || v->empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    long long n = std::stoll(*v, &used);
    if (used != v->size()) return std::nullopt;
    return n;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

CategoryGraph load_category_graph(std::istream& page_dump, std::istream& categorylinks_dump) {
  CategoryGraph graph;
  SqlRow row;
  SqlInsertReader pages(page_dump, "page");
  while (pages.next(row)) {
    if (row.size() < 3 || !row[2]) continue;
    auto id = to_int(row[0]);
    auto ns = to_int(row[1]);
    if (!id || !ns) continue;
    if (*ns != kArticleNamespace && *ns != kCategoryNamespace) continue;
    graph.add_page(*id, *row[2], static_cast<int>(*ns));
  }
  SqlInsertReader links(categorylinks_dump, "categorylinks");
  while (links.next(row)) {
    if (row.size() < 2 || !row[1]) continue;
    auto from = to_int(row[0]);
    if (!from || graph.page(*from) == nullptr) continue;
    graph.add_membership(*from, *row[1]);
  }
  return graph;
}

UnknownCategoryError::UnknownCategoryError(std::vector<std::string> missing)
    : std::runtime_error("unknown root categories: " + join(missing, ", ")),
      missing_(std::move(missing)) {}

std::set<PageId> traverse_categories(const CategoryGraph& graph,
                                     const std::set<std::string>& roots,
                                     const std::set<std::string>& exclusions, int max_depth,
                                     const std::map<std::string, int>& depth_overrides) {
  std::set<std::string> excluded;
  for (const auto& e : exclusions) excluded.insert(normalize_title(e));

  std::vector<std::string> missing;
  for (const auto& r : roots) {
    if (!graph.has_category(normalize_title(r))) missing.push_back(r);
  }
  if (!missing.empty()) throw UnknownCategoryError(std::move(missing));

  std::set<PageId> articles;
  for (const auto& raw_root : roots) {
    auto root = normalize_title(raw_root);
    int depth_limit = max_depth;
    if (auto it = depth_overrides.find(raw_root); it != depth_overrides.end()) {
      depth_limit = it->second;
    }
    if (excluded.count(root)) continue;
    std::set<std::string, std::less<>> visited{root};
    std::deque<std::pair<std::string, int>> queue{{root, 0}};
    while (!queue.empty()) {
      auto [category, depth] = std::move(queue.front());
      queue.pop_front();
      const auto* members = graph.members(category);
      if (members == nullptr) continue;
      for (PageId id : *members) {
        const PageInfo* info = graph.page(id);
        if (info == nullptr) continue;
        if (info->ns == kArticleNamespace) {
          articles.insert(id);
        } else if (info->ns == kCategoryNamespace && depth < depth_limit &&
                   !excluded.count(info->title) && visited.insert(info->title).second) {
          queue.emplace_back(info->title, depth + 1);
        }
      }
    }
  }
  return articles;
}

std::string build_instance_query(std::string_view class_item, std::string_view of_item) {
  std::string q = "SELECT ?item WHERE {\n\t?item p:P31 [ps:P31 wd:";
  q += class_item;
  q += ";\n\tpq:P642 wd:";
  q += of_item;
  q += "]. }";
  return q;
}

std::string build_outbreak_query() { return build_instance_query("Q3241045", "Q84263196"); }

std::string build_timeline_query() { return build_instance_query("Q18340550", "Q81068910"); }

std::string build_sitelinks_query(const std::vector<std::string>& items,
                                  const std::vector<std::string>& languages) {
  std::string q = "SELECT ?item ?site ?title WHERE {\n  VALUES ?item {";
  for (const auto& item : items) q += " wd:" + item;
  q += " }\n  VALUES ?site {";
  for (const auto& lang : languages) q += " <https://" + lang + ".wikipedia.org/>";
  q +=
      " }\n  ?article schema:about ?item ;\n           schema:isPartOf ?site ;\n"
      "           schema:name ?title .\n}";
  return q;
}

SparqlClient::SparqlClient(HttpClient& http, std::string endpoint)
    : http_(http), endpoint_(std::move(endpoint)) {}

std::string SparqlClient::query(const std::string& sparql) {
  auto url = endpoint_ + (endpoint_.find('?') == std::string::npos ? "?" : "&") +
             "format=json&query=" + percent_encode(sparql);
  auto res = http_.get(url);
  if (res.status != 200) {
    throw HttpError("SPARQL endpoint returned HTTP " + std::to_string(res.status), res.status);
  }
  return std::move(res.body);
}

namespace {

std::string entity_id(const std::string& uri) {
  auto slash = uri.rfind('/');
  return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

const json& bindings_of(const json& doc) { return doc.at("results").at("bindings"); }

}  // namespace

std::vector<std::string> parse_item_ids(std::string_view result_json) {
  auto doc = json::parse(result_json);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& b : bindings_of(doc)) {
    if (!b.contains("item")) continue;
    auto id = entity_id(b.at("item").at("value").get<std::string>());
    if (seen.insert(id).second) out.push_back(std::move(id));
  }
  return out;
}

std::string_view to_string(IdentifyMethod m) {
  switch (m) {
    case IdentifyMethod::kCategory: return "category";
    case IdentifyMethod::kWikidata: return "wikidata";
    case IdentifyMethod::kInfobox: return "infobox";
  }
  return "";
}

std::optional<IdentifyMethod> parse_identify_method(std::string_view s) {
  for (auto m : {IdentifyMethod::kCategory, IdentifyMethod::kWikidata, IdentifyMethod::kInfobox}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

CorpusArticle& CorpusSpec::add(std::string_view title, IdentifyMethod method) {
  auto canonical = normalize_title(title);
  auto& article = articles[canonical];
  article.title = canonical;
  article.provenance.insert(method);
  return article;
}

void CorpusSpec::merge(const CorpusSpec& other) {
  for (const auto& [title, a] : other.articles) {
    auto& mine = articles[title];
    mine.title = title;
    if (!mine.page_id) mine.page_id = a.page_id;
    if (!mine.wikidata_item) mine.wikidata_item = a.wikidata_item;
    mine.alternative_titles.insert(a.alternative_titles.begin(), a.alternative_titles.end());
    mine.provenance.insert(a.provenance.begin(), a.provenance.end());
  }
}

std::string corpus_to_json(const CorpusSpec& spec) {
  json articles = json::array();
  for (const auto& [title, a] : spec.articles) {
    json j{{"title", a.title}};
    if (a.page_id) j["page_id"] = *a.page_id;
    if (a.wikidata_item) j["wikidata_item"] = *a.wikidata_item;
    j["alternative_titles"] = a.alternative_titles;
    json prov = json::array();
    for (auto m : a.provenance) prov.push_back(std::string(to_string(m)));
    j["provenance"] = prov;
    articles.push_back(std::move(j));
  }
  json doc{{"language", spec.language}, {"articles", std::move(articles)}};
  return doc.dump(2) + "\n";
}

CorpusSpec corpus_from_json(std::string_view text) {
  auto doc = json::parse(text);
  CorpusSpec spec;
  spec.language = doc.at("language").get<std::string>();
  for (const auto& j : doc.at("articles")) {
    CorpusArticle a;
    a.title = j.at("title").get<std::string>();
    if (j.contains("page_id")) a.page_id = j.at("page_id").get<PageId>();
    if (j.contains("wikidata_item")) a.wikidata_item = j.at("wikidata_item").get<std::string>();
    for (const auto& t : j.value("alternative_titles", json::array())) {
      a.alternative_titles.insert(t.get<std::string>());
    }
    for (const auto& m : j.value("provenance", json::array())) {
      auto method = parse_identify_method(m.get<std::string>());
      if (!method) throw std::runtime_error("unknown provenance " + m.dump());
      a.provenance.insert(*method);
    }
    auto key = a.title;
    spec.articles.emplace(std::move(key), std::move(a));
  }
  return spec;
}

CorpusSpec corpus_from_pages(const CategoryGraph& graph, const std::set<PageId>& ids,
                             std::string language) {
  CorpusSpec spec;
  spec.language = std::move(language);
  for (PageId id : ids) {
    const PageInfo* info = graph.page(id);
    if (info == nullptr) continue;
    spec.add(info->title, IdentifyMethod::kCategory).page_id = id;
  }
  return spec;
}

std::map<std::string, CorpusSpec> resolve_sitelinks(const std::vector<std::string>& items,
                                                    const std::vector<std::string>& languages,
                                                    SparqlClient& endpoint,
                                                    std::size_t batch_size) {
  std::map<std::string, CorpusSpec> out;
  std::map<std::string, std::string> site_to_lang;
  for (const auto& lang : languages) {
    out[lang].language = lang;
    site_to_lang["https://" + lang + ".wikipedia.org/"] = lang;
  }
  if (batch_size == 0) batch_size = 1;
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    std::vector<std::string> batch(
        items.begin() + static_cast<std::ptrdiff_t>(start),
        items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), start + batch_size)));
    std::string body;
    try {
      body = endpoint.query(build_sitelinks_query(batch, languages));
    } catch (const HttpError& e) {
      throw PartialResultsError(std::string("sitelink lookup failed after ") +
                                    std::to_string(start) + " of " +
                                    std::to_string(items.size()) + " items: " + e.what(),
                                std::move(out));
    }
    auto doc = json::parse(body);
    for (const auto& b : bindings_of(doc)) {
      if (!b.contains("site") || !b.contains("title") || !b.contains("item")) continue;
      auto lang = site_to_lang.find(b.at("site").at("value").get<std::string>());
      if (lang == site_to_lang.end()) continue;
      auto& article = out[lang->second].add(b.at("title").at("value").get<std::string>(),
                                            IdentifyMethod::kWikidata);
      if (!article.wikidata_item) {
        article.wikidata_item = entity_id(b.at("item").at("value").get<std::string>());
      }
    }
  }
  return out;
}

bool matches_infobox(std::string_view wikitext, const InfoboxCriteria& criteria,
                     const TemplateStore* aliases) {
  std::set<std::string> wanted;
  for (const auto& n : criteria.infobox_names) {
    auto canonical = canonical_template_name(n);
    wanted.insert(aliases ? aliases->resolve_name(canonical) : canonical);
  }
  auto text = strip_comments(wikitext);
  for (const auto& call : find_template_calls(text)) {
    auto name = aliases ? aliases->resolve_name(call.name) : call.name;
    if (!wanted.count(name)) continue;
    const auto* p = call.param(criteria.parameter);
    if (p != nullptr && ifind(p->value, criteria.value_substring) != std::string_view::npos) {
      return true;
    }
  }
  return false;
}

InfoboxFilterResult filter_by_infobox(const CorpusSpec& candidates, const LatestTextFn& latest_text,
                                      const InfoboxCriteria& criteria,
                                      const TemplateStore* aliases) {
  InfoboxFilterResult result;
  result.kept.language = candidates.language;
  for (const auto& [title, article] : candidates.articles) {
    auto text = latest_text(article);
    if (text && matches_infobox(*text, criteria, aliases)) {
      auto copy = article;
      copy.provenance.insert(IdentifyMethod::kInfobox);
      result.kept.articles.emplace(title, std::move(copy));
    } else {
      result.dropped.push_back(title);
    }
  }
  return result;
}

}  // namespace wikirel
