#ifndef WIKIREL_INGEST_H_
#define WIKIREL_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wikirel/corpus.h"
#include "wikirel/dates.h"
#include "wikirel/diagnostics.h"
#include "wikirel/http.h"
#include "wikirel/psl.h"
#include "wikirel/wikitext.h"

namespace wikirel {

// ---------------------------------------------------------------------------
// XML history dumps

struct DumpPage {
  std::string title;  // as in the dump, namespace prefix included
  int ns = 0;
  PageId id = 0;
  std::optional<std::string> redirect;  // target title of <redirect title=.../>
};

struct DumpRevision {
  std::int64_t id = 0;
  Timestamp timestamp{};
  std::string text;
};

class DumpParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HistoryDumpVisitor {
 public:
  virtual ~HistoryDumpVisitor() = default;
  // Called once per page before its revisions. Returning false skips the
  // revisions (their text is not buffered).
  virtual bool on_page(const DumpPage& page) = 0;
  virtual void on_revision(const DumpPage& page, DumpRevision&& rev) = 0;
  virtual void on_page_end(const DumpPage&) {}
};

// Streams a MediaWiki XML export (pages-meta-history). Memory is bounded by
// the largest single revision.
void parse_history_dump(std::istream& in, HistoryDumpVisitor& visitor);

// Keeps what fetch_revisions returns for one window: every revision inside
// it plus the latest one before it. Revisions must arrive in ascending order.
class WindowSelector {
 public:
  explicit WindowSelector(DateRange window);
  void offer(RevisionText rev);
  // Selected revisions in ascending timestamp order.
  std::vector<RevisionText> take();

 private:
  Timestamp start_;
  Timestamp end_;
  std::optional<RevisionText> before_;
  std::vector<RevisionText> inside_;
};

std::vector<RevisionText> select_window(std::vector<RevisionText> revisions, DateRange window);

// Last revision with timestamp <= 23:59:59 of `day`, or nullptr.
const RevisionText* revision_of_day(const std::vector<RevisionText>& sorted, Date day);

struct HistoryScanOptions {
  std::string language;
  DateRange window;
  // Canonical titles whose revisions are collected.
  std::set<std::string> articles;
  bool collect_templates = true;
  bool collect_redirects = true;
  // When set, namespace-0 pages whose latest revision matches are listed.
  std::optional<InfoboxCriteria> infobox;
};

struct HistoryScan {
  std::map<std::string, std::vector<RevisionText>> revisions;  // by canonical title
  // Template name -> window-selected revisions, and template redirects.
  std::map<std::string, std::vector<std::pair<Timestamp, std::string>>> templates;
  std::map<std::string, std::string> template_aliases;
  // Namespace-0 redirects, normalized title -> normalized target.
  std::map<std::string, std::string> redirects;
  std::set<std::string> infobox_matches;
  DiagnosticTally diagnostics;

  TemplateStore template_store() const;
};

HistoryScan scan_history_dump(std::istream& in, const HistoryScanOptions& options);

// ---------------------------------------------------------------------------
// Revisions via the MediaWiki action API

struct RevisionFetch {
  std::vector<RevisionText> revisions;
  Diagnostics diagnostics;
};

// Revisions of `title` inside the window plus the latest one before it,
// following rvcontinue pagination. A missing page gives an empty list and
// an "article-missing" diagnostic. Throws HttpError on transport failure.
RevisionFetch fetch_revisions_api(HttpClient& http, const std::string& api_endpoint,
                                  const std::string& language, const std::string& title,
                                  DateRange window);

using TemplateHistories = std::map<std::string, std::vector<std::pair<Timestamp, std::string>>>;

// Template histories needed by `texts`, found by following transclusions
// (and template redirects) up to `max_depth` levels. Templates in `skip`
// (canonical names, e.g. citation templates) are not fetched.
TemplateHistories fetch_templates_api(HttpClient& http, const std::string& api_endpoint,
                                      const std::string& language,
                                      const std::vector<std::string>& texts, DateRange window,
                                      int max_depth = kDefaultMaxDepth,
                                      const std::set<std::string>& skip = {});

// On-disk revision cache keyed by (language, article, window).
class RevisionCache {
 public:
  explicit RevisionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::filesystem::path path_for(const std::string& language, const std::string& title,
                                 DateRange window) const;
  std::optional<std::vector<RevisionText>> load(const std::string& language,
                                                const std::string& title, DateRange window) const;
  void store(const std::string& language, const std::string& title, DateRange window,
             const std::vector<RevisionText>& revisions) const;

 private:
  std::filesystem::path dir_;
};

std::string revisions_to_json(const std::vector<RevisionText>& revisions);
std::vector<RevisionText> revisions_from_json(std::string_view text);

// Namespace-`ns` pages transcluding `template_title` ("Template:X").
std::vector<std::string> fetch_embeddedin(HttpClient& http, const std::string& api_endpoint,
                                          const std::string& template_title, int ns = 0);

// Current wikitext of each existing page, keyed by normalized title.
std::map<std::string, std::string> fetch_latest_texts(HttpClient& http,
                                                      const std::string& api_endpoint,
                                                      const std::vector<std::string>& titles);

// ---------------------------------------------------------------------------
// Redirects

class RedirectMap {
 public:
  // Canonical title for `title`; titles without a redirect map to themselves.
  std::string canonical(std::string_view title) const;
  const std::map<std::string, std::string>& entries() const { return map_; }
  void set(std::string alternative, std::string canonical) {
    map_[std::move(alternative)] = std::move(canonical);
  }

 private:
  std::map<std::string, std::string> map_;
};

inline constexpr int kMaxRedirectHops = 3;

// Maps every redirect whose target, after at most kMaxRedirectHops hops,
// is a corpus article. Members of redirect cycles are dropped with a
// "redirect-cycle" diagnostic.
RedirectMap build_redirect_map(const CorpusSpec& corpus,
                               const std::map<std::string, std::string>& redirect_edges,
                               Diagnostics* diagnostics = nullptr);

// Records the redirect titles of each article as its alternative titles.
void apply_alternative_titles(CorpusSpec& corpus, const RedirectMap& redirects);

// Namespace-0 redirect edges from the `page` and `redirect` SQL dumps.
std::map<std::string, std::string> load_redirect_edges(std::istream& page_dump,
                                                       std::istream& redirect_dump);

// Redirects pointing at `title`, via the action API (list of titles).
std::vector<std::string> fetch_redirects_api(HttpClient& http, const std::string& api_endpoint,
                                             const std::string& title);

// ---------------------------------------------------------------------------
// Page views

enum class ViewSource { kDump, kApi };

struct PageViewRecord {
  std::string language;
  std::string title;  // canonical
  Date date;
  std::int64_t views_all = 0;
  std::int64_t views_human = 0;  // 0 for dump records, which carry no split
  ViewSource source = ViewSource::kDump;

  bool operator==(const PageViewRecord&) const = default;
};

// Streams hourly pageview dump files ("project title count bytes" lines)
// and folds views of alternative titles into their canonical article.
class HourlyPageviewIngester {
 public:
  HourlyPageviewIngester(const std::vector<CorpusSpec>& corpora, DateRange window);

  // Lines of one hourly file for day `day`. Days outside the window are ignored.
  void ingest(std::istream& lines, Date day);
  // Reads a file named pageviews-YYYYMMDD-HHMMSS[.gz]; throws if the name
  // carries no date.
  void ingest_file(const std::filesystem::path& path);

  std::vector<PageViewRecord> records() const;
  // Sum of counts of all lines that matched a corpus title.
  std::int64_t matched_views() const { return matched_views_; }
  const DiagnosticTally& diagnostics() const { return diagnostics_; }

 private:
  DateRange window_;
  // project code -> (title -> canonical)
  std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>> lookup_;
  std::map<std::tuple<std::string, std::string, Date>, std::int64_t> counts_;
  std::int64_t matched_views_ = 0;
  DiagnosticTally diagnostics_;
};

std::optional<Date> date_from_pageview_filename(std::string_view name);

// URL of the per-article daily pageview endpoint.
std::string pageview_api_url(const std::string& base, const std::string& language,
                             const std::string& title, const std::string& agent, DateRange window);

// Daily all-agent and user views of the article summed over its canonical
// and alternative titles. Days missing from the response count as 0 and a
// 404 means no views at all.
std::vector<PageViewRecord> fetch_pageviews_api(HttpClient& http, const std::string& base,
                                                const std::string& language,
                                                const CorpusArticle& article, DateRange window);

// ---------------------------------------------------------------------------
// Snapshots

struct SourceCounts {
  std::int64_t total_refs = 0;                         // C(i)
  std::map<std::string, std::int64_t> domain_counts;  // C_s(i)

  bool operator==(const SourceCounts&) const = default;
};

// C(i) counts every URL of every occurrence, resolvable or not; C_s(i) counts
// the URLs resolving to s. Occurrences without URLs are dropped.
SourceCounts count_sources(const std::vector<ReferenceOccurrence>& occurrences,
                           const PslRuleSet& rules, DiagnosticTally* tally = nullptr);

struct ArticleDaySnapshot {
  std::string article_id;
  Date date;
  std::int64_t total_refs = 0;
  std::map<std::string, std::int64_t> domain_counts;
  std::int64_t views_all = 0;
  std::int64_t views_human = 0;

  bool operator==(const ArticleDaySnapshot&) const = default;
};

// Source counts of one article's revisions, parallel to its revision list.
struct ArticleHistory {
  std::string article_id;
  std::vector<Timestamp> revision_times;  // ascending
  std::vector<SourceCounts> counts;
};

// One snapshot per (article, day) once the article exists, using the
// revision of the day; views default to 0.
std::vector<ArticleDaySnapshot> build_snapshots(const std::vector<ArticleHistory>& histories,
                                                const std::vector<PageViewRecord>& pageviews,
                                                DateRange calendar);

// Indices of the revisions that are the revision of some day of `calendar`.
std::vector<std::size_t> revisions_needed(const std::vector<Timestamp>& sorted, DateRange calendar);

std::string snapshots_to_json(const std::vector<ArticleDaySnapshot>& snapshots);
std::vector<ArticleDaySnapshot> snapshots_from_json(std::string_view text);
std::string pageviews_to_json(const std::vector<PageViewRecord>& records);
std::vector<PageViewRecord> pageviews_from_json(std::string_view text);

}  // namespace wikirel

#endif  // WIKIREL_INGEST_H_
