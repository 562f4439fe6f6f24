#ifndef WIKIREL_CORPUS_H_
#define WIKIREL_CORPUS_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wikirel/http.h"
#include "wikirel/wikitext.h"

namespace wikirel {

using PageId = std::int64_t;

inline constexpr int kArticleNamespace = 0;
inline constexpr int kTemplateNamespace = 10;
inline constexpr int kCategoryNamespace = 14;

// ---------------------------------------------------------------------------
// Category graph

struct PageInfo {
  std::string title;  // normalized, spaces not underscores
  int ns = 0;
};

class CategoryGraph {
 public:
  void add_page(PageId id, std::string_view title, int ns);
  void add_membership(PageId member, std::string_view category);

  const PageInfo* page(PageId id) const;
  const std::set<PageId>* members(std::string_view category) const;
  // True when the category has a page or at least one member.
  bool has_category(std::string_view category) const;

  std::size_t page_count() const { return pages_.size(); }
  const std::map<std::string, std::set<PageId>, std::less<>>& membership() const {
    return membership_;
  }

 private:
  std::unordered_map<PageId, PageInfo> pages_;
  std::map<std::string, std::set<PageId>, std::less<>> membership_;
  std::set<std::string, std::less<>> category_pages_;
};

// Reads the `page` and `categorylinks` tables. Only namespaces 0 and 14 are
// kept, and only edges whose member is a kept page.
CategoryGraph load_category_graph(std::istream& page_dump, std::istream& categorylinks_dump);

class UnknownCategoryError : public std::runtime_error {
 public:
  explicit UnknownCategoryError(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

inline constexpr int kDefaultCategoryDepth = 3;

// Breadth-first descent from every root. Depth 0 returns the articles
// directly in the roots. Excluded categories are neither collected nor
// descended into. `depth_overrides` replaces max_depth for single roots.
std::set<PageId> traverse_categories(const CategoryGraph& graph,
                                     const std::set<std::string>& roots,
                                     const std::set<std::string>& exclusions, int max_depth,
                                     const std::map<std::string, int>& depth_overrides = {});

// ---------------------------------------------------------------------------
// Wikidata

// SELECT ?item for items with P31 = `class_item` qualified by P642 = `of_item`.
std::string build_instance_query(std::string_view class_item, std::string_view of_item);
std::string build_outbreak_query();
std::string build_timeline_query();

// Query returning (?item, ?site, ?title) for the sitelinks of `items` to
// the Wikipedias of `languages`.
std::string build_sitelinks_query(const std::vector<std::string>& items,
                                  const std::vector<std::string>& languages);

class SparqlClient {
 public:
  SparqlClient(HttpClient& http, std::string endpoint);
  // Returns the JSON result document. Throws HttpError.
  std::string query(const std::string& sparql);

 private:
  HttpClient& http_;
  std::string endpoint_;
};

// Item ids ("Q42") bound to ?item in a SPARQL JSON result, in order, deduplicated.
std::vector<std::string> parse_item_ids(std::string_view result_json);

// ---------------------------------------------------------------------------
// Corpus

enum class IdentifyMethod { kCategory, kWikidata, kInfobox };

std::string_view to_string(IdentifyMethod m);
std::optional<IdentifyMethod> parse_identify_method(std::string_view s);

struct CorpusArticle {
  std::string title;  // canonical title, also the article id downstream
  std::optional<PageId> page_id;
  std::optional<std::string> wikidata_item;
  std::set<std::string> alternative_titles;
  std::set<IdentifyMethod> provenance;

  bool operator==(const CorpusArticle&) const = default;
};

struct CorpusSpec {
  std::string language;
  std::map<std::string, CorpusArticle> articles;  // keyed by canonical title

  // Adds or updates the article, recording the method.
  CorpusArticle& add(std::string_view title, IdentifyMethod method);
  // Set union with provenance merged.
  void merge(const CorpusSpec& other);

  bool operator==(const CorpusSpec&) const = default;
};

std::string corpus_to_json(const CorpusSpec& spec);
CorpusSpec corpus_from_json(std::string_view text);

// The articles of `ids` as a corpus of one language, with category provenance.
CorpusSpec corpus_from_pages(const CategoryGraph& graph, const std::set<PageId>& ids,
                             std::string language);

class PartialResultsError : public std::runtime_error {
 public:
  PartialResultsError(const std::string& what, std::map<std::string, CorpusSpec> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::map<std::string, CorpusSpec>& partial() const { return partial_; }

 private:
  std::map<std::string, CorpusSpec> partial_;
};

// Looks up the article title of every item in every requested language.
// Items without a sitelink contribute nothing. On endpoint failure throws
// PartialResultsError carrying the batches resolved so far.
std::map<std::string, CorpusSpec> resolve_sitelinks(const std::vector<std::string>& items,
                                                    const std::vector<std::string>& languages,
                                                    SparqlClient& endpoint,
                                                    std::size_t batch_size = 200);

// ---------------------------------------------------------------------------
// Infobox criteria

struct InfoboxCriteria {
  std::set<std::string> infobox_names{"Infobox outbreak", "Infobox pandemic"};
  std::string parameter = "disease";
  std::string value_substring = "COVID-19";  // case-insensitive
};

// True when `wikitext` contains one of the infoboxes (after alias
// resolution through `aliases`, if given) with a matching parameter value.
bool matches_infobox(std::string_view wikitext, const InfoboxCriteria& criteria,
                     const TemplateStore* aliases = nullptr);

struct InfoboxFilterResult {
  CorpusSpec kept;
  std::vector<std::string> dropped;
};

using LatestTextFn = std::function<std::optional<std::string>(const CorpusArticle&)>;

// Keeps candidates whose latest text matches; kept articles gain infobox
// provenance. Candidates without text are dropped.
InfoboxFilterResult filter_by_infobox(const CorpusSpec& candidates, const LatestTextFn& latest_text,
                                      const InfoboxCriteria& criteria,
                                      const TemplateStore* aliases = nullptr);

}  // namespace wikirel

#endif  // WIKIREL_CORPUS_H_
