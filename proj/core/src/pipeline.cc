#include "wikirel/pipeline.h"

#include <chrono>
#include <fstream>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>

#include "parallel.h"
#include "wikirel/corpus.h"
#include "wikirel/ingest.h"
#include "wikirel/psl.h"
#include "wikirel/report.h"
#include "wikirel/sql_dump.h"
#include "wikirel/strings.h"
#include "wikirel/wikimarkup.h"

#ifndef WIKIREL_VERSION
#define WIKIREL_VERSION "0.0.0"
#endif

namespace wikirel {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view library_version() { return WIKIREL_VERSION; }

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kIdentify: return "identify";
    case Stage::kFetch: return "fetch";
    case Stage::kExtract: return "extract";
    case Stage::kResolve: return "resolve";
    case Stage::kViews: return "views";
    case Stage::kSnapshot: return "snapshot";
    case Stage::kScore: return "score";
    case Stage::kReport: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto stage : kAllStages) {
    if (to_string(stage) == s) return stage;
  }
  return std::nullopt;
}

std::string series_to_json(const std::vector<ScoreSeries>& series) {
  json arr = json::array();
  for (const auto& s : series) {
    json daily = json::object(), monthly = json::object(), rank = json::object();
    for (const auto& [d, v] : s.daily) daily[d.to_string()] = v;
    for (const auto& [m, v] : s.monthly) monthly[m.to_string()] = v;
    for (const auto& [m, r] : s.monthly_rank) rank[m.to_string()] = r;
    arr.push_back({{"domain", s.domain},
                   {"model", std::string(to_string(s.model))},
                   {"daily", std::move(daily)},
                   {"monthly", std::move(monthly)},
                   {"monthly_rank", std::move(rank)}});
  }
  return arr.dump(1) + "\n";
}

std::vector<ScoreSeries> series_from_json(std::string_view text) {
  std::vector<ScoreSeries> out;
  auto month = [](const std::string& s) {
    auto ym = YearMonth::parse(s);
    if (!ym) throw std::runtime_error("bad month '" + s + "' in score series");
    return *ym;
  };
  for (const auto& j : json::parse(text)) {
    ScoreSeries s;
    s.domain = j.at("domain").get<std::string>();
    auto model = parse_model_id(j.at("model").get<std::string>());
    if (!model) throw std::runtime_error("bad model in score series");
    s.model = *model;
    for (const auto& [k, v] : j.at("daily").items()) {
      auto d = Date::parse(k);
      if (!d) throw std::runtime_error("bad date '" + k + "' in score series");
      s.daily[*d] = v.get<double>();
    }
    for (const auto& [k, v] : j.at("monthly").items()) s.monthly[month(k)] = v.get<double>();
    for (const auto& [k, v] : j.at("monthly_rank").items()) s.monthly_rank[month(k)] = v.get<int>();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string now_utc() {
  return format_timestamp(
      std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

std::string digest(std::string_view s) { return hex64(fnv1a64(s)); }

std::string read_required(const fs::path& p) {
  auto text = read_file(p);
  if (!text) throw std::runtime_error("missing stage artifact " + p.string());
  return std::move(*text);
}

std::string dump_json(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

// ---------------------------------------------------------------------------
// Stage artifacts

struct Marker {
  std::string input;
  std::string output;
};

class StageStore {
 public:
  explicit StageStore(fs::path output_dir) : root_(std::move(output_dir) / "stages") {}

  fs::path dir(Stage s) const { return root_ / std::string(to_string(s)); }
  fs::path file(Stage s, const std::string& key) const { return dir(s) / (key + ".json"); }

  std::optional<Marker> marker(Stage s, const std::string& key) const {
    auto text = read_file(dir(s) / (key + ".done"));
    if (!text) return std::nullopt;
    auto j = json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return Marker{j.value("input", ""), j.value("output", "")};
  }

  void commit(Stage s, const std::string& key, const Marker& m) const {
    write_file_atomic(dir(s) / (key + ".done"),
                      json{{"input", m.input}, {"output", m.output}}.dump() + "\n");
  }

  // Output digest of an upstream stage; it must have completed.
  std::string output_of(Stage s, const std::string& key) const {
    auto m = marker(s, key);
    if (!m) throw std::runtime_error("stage " + std::string(to_string(s)) + " has no output for " + key);
    return m->output;
  }

 private:
  fs::path root_;
};

// ---------------------------------------------------------------------------
// Serialization of stage-private artifacts

std::string templates_to_json(const TemplateHistories& templates,
                              const std::map<std::string, std::string>& aliases) {
  json t = json::object();
  for (const auto& [name, revs] : templates) {
    json arr = json::array();
    for (const auto& [ts, text] : revs) arr.push_back({format_timestamp(ts), text});
    t[name] = std::move(arr);
  }
  return dump_json(json{{"templates", std::move(t)}, {"aliases", aliases}}) + "\n";
}

TemplateStore templates_from_json(std::string_view text) {
  auto doc = json::parse(text);
  TemplateStore::Builder b;
  for (const auto& [name, revs] : doc.at("templates").items()) {
    for (const auto& r : revs) {
      auto ts = parse_timestamp(r.at(0).get<std::string>());
      if (!ts) throw std::runtime_error("bad template timestamp");
      b.add_revision(name, *ts, r.at(1).get<std::string>());
    }
  }
  for (const auto& [alias, target] : doc.at("aliases").items()) {
    b.add_alias(alias, target.get<std::string>());
  }
  return std::move(b).build();
}

struct ExtractedRevision {
  Timestamp timestamp{};
  std::vector<std::vector<std::string>> urls;  // one list per occurrence
};

std::string extracted_to_json(const std::vector<ExtractedRevision>& revs) {
  json arr = json::array();
  for (const auto& r : revs) arr.push_back({{"timestamp", format_timestamp(r.timestamp)}, {"urls", r.urls}});
  return dump_json(arr) + "\n";
}

std::vector<ExtractedRevision> extracted_from_json(std::string_view text) {
  std::vector<ExtractedRevision> out;
  for (const auto& j : json::parse(text)) {
    auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) throw std::runtime_error("bad timestamp in extraction artifact");
    out.push_back({*ts, j.at("urls").get<std::vector<std::vector<std::string>>>()});
  }
  return out;
}

std::string histories_to_json(const std::vector<ArticleHistory>& histories) {
  json doc = json::array();
  for (const auto& h : histories) {
    json times = json::array(), counts = json::array();
    for (auto t : h.revision_times) times.push_back(format_timestamp(t));
    for (const auto& c : h.counts) counts.push_back({{"total_refs", c.total_refs}, {"domains", c.domain_counts}});
    doc.push_back({{"article_id", h.article_id}, {"revision_times", times}, {"counts", counts}});
  }
  return dump_json(doc) + "\n";
}

std::vector<ArticleHistory> histories_from_json(std::string_view text) {
  std::vector<ArticleHistory> out;
  for (const auto& j : json::parse(text)) {
    ArticleHistory h;
    h.article_id = j.at("article_id").get<std::string>();
    for (const auto& t : j.at("revision_times")) {
      auto ts = parse_timestamp(t.get<std::string>());
      if (!ts) throw std::runtime_error("bad timestamp in history artifact");
      h.revision_times.push_back(*ts);
    }
    for (const auto& c : j.at("counts")) {
      h.counts.push_back({c.at("total_refs").get<std::int64_t>(),
                          c.at("domains").get<std::map<std::string, std::int64_t>>()});
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::string article_key(const std::string& title) { return hex64(fnv1a64(title)); }

std::vector<fs::path> pageview_files(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (!fs::is_directory(p)) {
      files.push_back(p);
      continue;
    }
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file() && e.path().filename().string().rfind("pageviews-", 0) == 0) {
        found.push_back(e.path());
      }
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  return files;
}

// ---------------------------------------------------------------------------

class Runner {
 public:
  Runner(const PipelineConfig& cfg, const RunOptions& opts, std::vector<const LanguageConfig*> langs,
         HttpClient* network)
      : cfg_(cfg),
        opts_(opts),
        langs_(std::move(langs)),
        network_(network),
        http_(network, cfg.cache_dir),
        revision_cache_(cfg.cache_dir),
        store_(cfg.output_dir) {
    for (const auto* l : langs_) lang_fp_[l->code] = language_fingerprint(cfg_, *l);
    cross_language_ = langs_.size() == cfg_.languages.size();
    // Hourly dumps carry no agent split, so there are no human views.
    for (auto m : cfg_.models) {
      if (m == ModelId::kPR2 && cfg_.pageview_mode == PageviewMode::kDump) {
        log("PR2 skipped: pageview dumps have no human view counts");
        continue;
      }
      models_.push_back(m);
    }
  }

  std::size_t network_calls() const { return http_.network_calls() + revision_calls_; }

  // Returns true if any unit of the stage ran.
  bool run(Stage stage, DiagnosticTally& tally) {
    switch (stage) {
      case Stage::kIdentify:
        return per_language(stage, tally, {}, [&](const LanguageConfig& l, DiagnosticTally& t) {
          return identify(l, t);
        });
      case Stage::kFetch:
        return per_language(stage, tally, {Stage::kIdentify},
                            [&](const LanguageConfig& l, DiagnosticTally& t) { return fetch(l, t); });
      case Stage::kExtract:
        return per_language(stage, tally, {Stage::kFetch},
                            [&](const LanguageConfig& l, DiagnosticTally& t) { return extract(l, t); });
      case Stage::kResolve:
        return per_language(stage, tally, {Stage::kExtract},
                            [&](const LanguageConfig& l, DiagnosticTally& t) { return resolve(l, t); });
      case Stage::kViews:
        return views(tally);
      case Stage::kSnapshot:
        return per_language(stage, tally, {Stage::kResolve, Stage::kViews},
                            [&](const LanguageConfig& l, DiagnosticTally&) { return snapshot(l); });
      case Stage::kScore:
        return score(tally);
      case Stage::kReport:
        report(tally);
        return true;
    }
    return false;
  }

 private:
  void log(const std::string& msg) const {
    if (opts_.log) opts_.log(msg);
  }

  std::string input_key(Stage stage, const std::string& lang, const std::vector<Stage>& upstream) const {
    std::string s = std::string(to_string(stage)) + "\n" + lang_fp_.at(lang);
    for (auto u : upstream) s += "\n" + store_.output_of(u, lang);
    return digest(s);
  }

  bool current(Stage stage, const std::string& key, const std::string& input) const {
    if (opts_.force.count(stage)) return false;
    auto m = store_.marker(stage, key);
    return m && m->input == input && artifacts_present(stage, key);
  }

  bool artifacts_present(Stage stage, const std::string& key) const {
    auto per_article = [&](auto path_of) {
      auto text = read_file(store_.file(Stage::kIdentify, key));
      if (!text) return false;
      for (const auto& [title, _] : corpus_from_json(*text).articles) {
        if (!fs::exists(path_of(key, title))) return false;
      }
      return true;
    };
    switch (stage) {
      case Stage::kFetch:
        return fs::exists(store_.dir(stage) / key / "templates.json") &&
               per_article([&](const auto& l, const auto& t) { return revisions_path(l, t); });
      case Stage::kExtract:
        return per_article([&](const auto& l, const auto& t) { return extracted_path(l, t); });
      case Stage::kScore:
        for (auto model : models_) {
          if (!fs::exists(series_path(key, model))) return false;
        }
        return true;
      case Stage::kReport:
        return false;
      default:
        return fs::exists(store_.file(stage, key));
    }
  }

  template <typename Fn>
  bool per_language(Stage stage, DiagnosticTally& tally, const std::vector<Stage>& upstream, Fn&& fn) {
    bool ran = false;
    for (const auto* l : langs_) {
      auto input = input_key(stage, l->code, upstream);
      if (current(stage, l->code, input)) continue;
      log(std::string(to_string(stage)) + " " + l->code);
      DiagnosticTally t;
      std::string output = fn(*l, t);
      store_.commit(stage, l->code, {input, output});
      tally.merge(t);
      ran = true;
    }
    return ran;
  }

  CorpusSpec load_corpus(const std::string& lang) const {
    return corpus_from_json(read_required(store_.file(Stage::kIdentify, lang)));
  }

  // --- identify -----------------------------------------------------------

  const std::map<std::string, CorpusSpec>& wikidata_corpora() {
    if (!wikidata_) {
      SparqlClient sparql(http_, cfg_.sparql_endpoint);
      std::vector<std::string> items;
      for (const auto& q : {build_outbreak_query(), build_timeline_query()}) {
        for (auto& id : parse_item_ids(sparql.query(q))) items.push_back(std::move(id));
      }
      std::sort(items.begin(), items.end());
      items.erase(std::unique(items.begin(), items.end()), items.end());
      std::vector<std::string> codes;
      for (const auto* l : langs_) {
        if (!l->corpus_file) codes.push_back(l->code);
      }
      wikidata_ = items.empty() ? std::map<std::string, CorpusSpec>{}
                                : resolve_sitelinks(items, codes, sparql, cfg_.sparql_batch);
    }
    return *wikidata_;
  }

  std::string identify(const LanguageConfig& lang, DiagnosticTally& tally) {
    CorpusSpec corpus;
    corpus.language = lang.code;
    std::map<std::string, std::string> redirect_edges;
    bool have_edges = false;

    if (lang.page_dump && lang.redirect_dump) {
      InputFile pages(lang.page_dump->string()), redirects(lang.redirect_dump->string());
      redirect_edges = load_redirect_edges(pages.stream(), redirects.stream());
      have_edges = true;
    }

    std::set<std::string> dump_infobox_matches;
    bool infobox = !lang.corpus_file && cfg_.methods.count(IdentifyMethod::kInfobox);
    if (lang.source == SourceMode::kDump && (!have_edges || infobox)) {
      HistoryScanOptions o;
      o.language = lang.code;
      o.window = cfg_.window;
      o.collect_templates = false;
      o.collect_redirects = !have_edges;
      if (infobox) o.infobox = cfg_.infobox;
      for (const auto& path : lang.history_dumps) {
        InputFile in(path.string());
        auto scan = scan_history_dump(in.stream(), o);
        for (auto& [from, to] : scan.redirects) redirect_edges[from] = to;
        dump_infobox_matches.merge(scan.infobox_matches);
      }
      have_edges = have_edges || lang.source == SourceMode::kDump;
    }

    if (lang.corpus_file) {
      corpus = corpus_from_json(read_required(*lang.corpus_file));
      corpus.language = lang.code;
    } else {
      if (cfg_.methods.count(IdentifyMethod::kCategory)) {
        InputFile pages(lang.page_dump->string()), links(lang.categorylinks_dump->string());
        auto graph = load_category_graph(pages.stream(), links.stream());
        auto ids = traverse_categories(graph, lang.category_roots, lang.category_exclusions,
                                       cfg_.category_depth, lang.category_depth_overrides);
        corpus.merge(corpus_from_pages(graph, ids, lang.code));
      }
      if (cfg_.methods.count(IdentifyMethod::kWikidata)) {
        auto it = wikidata_corpora().find(lang.code);
        if (it != wikidata_corpora().end()) corpus.merge(it->second);
      }
      if (infobox) {
        if (lang.source == SourceMode::kDump) {
          for (const auto& t : dump_infobox_matches) corpus.add(t, IdentifyMethod::kInfobox);
        } else {
          corpus.merge(identify_infobox_api(lang, corpus, tally));
        }
      }
    }

    if (!have_edges) {
      for (const auto& [title, _] : corpus.articles) {
        for (auto& alt : fetch_redirects_api(http_, lang.api_endpoint, title)) redirect_edges[alt] = title;
      }
    }
    Diagnostics diags;
    auto redirects = build_redirect_map(corpus, redirect_edges, &diags);
    tally.add(diags);
    apply_alternative_titles(corpus, redirects);
    tally.add("corpus-articles", corpus.articles.size());

    auto text = corpus_to_json(corpus);
    write_file_atomic(store_.file(Stage::kIdentify, lang.code), text);
    return digest(text);
  }

  CorpusSpec identify_infobox_api(const LanguageConfig& lang, const CorpusSpec& current,
                                  DiagnosticTally& tally) {
    CorpusSpec candidates;
    candidates.language = lang.code;
    for (const auto& [title, article] : current.articles) candidates.articles[title] = article;
    for (const auto& name : cfg_.infobox.infobox_names) {
      for (const auto& t : fetch_embeddedin(http_, lang.api_endpoint, "Template:" + name)) {
        if (!candidates.articles.count(t)) candidates.add(t, IdentifyMethod::kInfobox);
      }
    }
    std::vector<std::string> titles;
    for (const auto& [t, _] : candidates.articles) titles.push_back(t);
    auto texts = fetch_latest_texts(http_, lang.api_endpoint, titles);
    auto result = filter_by_infobox(
        candidates,
        [&](const CorpusArticle& a) -> std::optional<std::string> {
          auto it = texts.find(a.title);
          if (it == texts.end()) return std::nullopt;
          return it->second;
        },
        cfg_.infobox);
    tally.add("infobox-rejected", result.dropped.size());
    return result.kept;
  }

  // --- fetch --------------------------------------------------------------

  fs::path revisions_path(const std::string& lang, const std::string& title) const {
    return store_.dir(Stage::kFetch) / lang / (article_key(title) + ".json");
  }

  std::string fetch(const LanguageConfig& lang, DiagnosticTally& tally) {
    auto corpus = load_corpus(lang.code);
    std::map<std::string, std::vector<RevisionText>> revisions;
    TemplateHistories templates;
    std::map<std::string, std::string> aliases;

    if (lang.source == SourceMode::kDump) {
      HistoryScanOptions o;
      o.language = lang.code;
      o.window = cfg_.window;
      for (const auto& [t, _] : corpus.articles) o.articles.insert(t);
      o.collect_redirects = false;
      for (const auto& path : lang.history_dumps) {
        InputFile in(path.string());
        auto scan = scan_history_dump(in.stream(), o);
        for (auto& [t, revs] : scan.revisions) {
          auto& dst = revisions[t];
          for (auto& r : revs) dst.push_back(std::move(r));
        }
        for (auto& [name, revs] : scan.templates) {
          auto& dst = templates[name];
          for (auto& r : revs) dst.push_back(std::move(r));
        }
        aliases.merge(scan.template_aliases);
      }
      // Pages split across dump files are reselected as a whole.
      for (auto& [t, revs] : revisions) revs = select_window(std::move(revs), cfg_.window);
      for (auto& [name, revs] : templates) {
        std::vector<RevisionText> tmp;
        for (auto& [ts, text] : revs) tmp.push_back({name, lang.code, ts, std::move(text)});
        revs.clear();
        for (auto& r : select_window(std::move(tmp), cfg_.window)) revs.emplace_back(r.timestamp, std::move(r.wikitext));
      }
      for (const auto& [t, _] : corpus.articles) {
        if (!revisions.count(t)) tally.add("article-missing");
      }
    } else {
      std::vector<std::string> texts;
      for (const auto& [title, _] : corpus.articles) {
        auto cached = revision_cache_.load(lang.code, title, cfg_.window);
        if (!cached) {
          if (!network_) throw HttpError("revisions of " + lang.code + ":" + title + " are not cached");
          auto fetched = fetch_revisions_api(*network_, lang.api_endpoint, lang.code, title, cfg_.window);
          ++revision_calls_;
          tally.add(fetched.diagnostics);
          revision_cache_.store(lang.code, title, cfg_.window, fetched.revisions);
          cached = std::move(fetched.revisions);
        }
        for (const auto& r : *cached) texts.push_back(r.wikitext);
        revisions[title] = std::move(*cached);
      }
      templates = fetch_templates_api(http_, lang.api_endpoint, lang.code, texts, cfg_.window,
                                      lang.extraction.max_depth,
                                      lang.extraction.citations.citation_templates);
    }

    std::string digests;
    for (const auto& [title, _] : corpus.articles) {
      auto it = revisions.find(title);
      auto text = revisions_to_json(it == revisions.end() ? std::vector<RevisionText>{} : it->second);
      write_file_atomic(revisions_path(lang.code, title), text);
      digests += digest(text);
      tally.add("revisions", it == revisions.end() ? 0 : it->second.size());
    }
    auto ttext = templates_to_json(templates, aliases);
    write_file_atomic(store_.dir(Stage::kFetch) / lang.code / "templates.json", ttext);
    tally.add("templates", templates.size());
    return digest(digests + digest(ttext));
  }

  // --- extract / resolve --------------------------------------------------

  fs::path extracted_path(const std::string& lang, const std::string& title) const {
    return store_.dir(Stage::kExtract) / lang / (article_key(title) + ".json");
  }

  std::string extract(const LanguageConfig& lang, DiagnosticTally& tally) {
    auto corpus = load_corpus(lang.code);
    auto store = templates_from_json(read_required(store_.dir(Stage::kFetch) / lang.code / "templates.json"));
    std::vector<std::string> titles;
    for (const auto& [t, _] : corpus.articles) titles.push_back(t);
    const auto window_start = start_of_day(cfg_.window.from);

    std::vector<std::string> digests(titles.size());
    std::vector<DiagnosticTally> tallies(titles.size());
    detail::parallel_for(titles.size(), cfg_.threads, [&](std::size_t i) {
      auto revs = revisions_from_json(read_required(revisions_path(lang.code, titles[i])));
      std::vector<Timestamp> times;
      for (const auto& r : revs) times.push_back(r.timestamp);
      std::vector<ExtractedRevision> out;
      for (auto idx : revisions_needed(times, cfg_.window)) {
        // The state at window start renders with the templates of that moment.
        RevisionText rev = std::move(revs[idx]);
        auto original = rev.timestamp;
        rev.timestamp = std::max(rev.timestamp, window_start);
        auto res = extract_revision(rev, store, lang.extraction);
        tallies[i].add(res.diagnostics);
        ExtractedRevision e{original, {}};
        for (auto& occ : res.occurrences) e.urls.push_back(std::move(occ.urls));
        tallies[i].add("occurrences", e.urls.size());
        out.push_back(std::move(e));
      }
      auto text = extracted_to_json(out);
      write_file_atomic(extracted_path(lang.code, titles[i]), text);
      digests[i] = digest(text);
    });
    for (const auto& t : tallies) tally.merge(t);
    std::string all;
    for (const auto& d : digests) all += d;
    return digest(all);
  }

  const PslRuleSet& psl() {
    if (!psl_) psl_ = PslRuleSet::load(cfg_.psl_path, cfg_.psl_private_rules);
    return *psl_;
  }

  std::string resolve(const LanguageConfig& lang, DiagnosticTally& tally) {
    auto corpus = load_corpus(lang.code);
    const auto& rules = psl();
    std::vector<ArticleHistory> histories;
    for (const auto& [title, _] : corpus.articles) {
      ArticleHistory h;
      h.article_id = title;
      for (auto& rev : extracted_from_json(read_required(extracted_path(lang.code, title)))) {
        std::vector<ReferenceOccurrence> occ(rev.urls.size());
        for (std::size_t i = 0; i < occ.size(); ++i) occ[i].urls = std::move(rev.urls[i]);
        h.revision_times.push_back(rev.timestamp);
        h.counts.push_back(count_sources(occ, rules, &tally));
      }
      histories.push_back(std::move(h));
    }
    auto text = histories_to_json(histories);
    write_file_atomic(store_.file(Stage::kResolve, lang.code), text);
    return digest(text);
  }

  // --- views --------------------------------------------------------------

  bool views(DiagnosticTally& tally) {
    std::vector<std::pair<const LanguageConfig*, std::string>> todo;
    for (const auto* l : langs_) {
      auto input = digest(input_key(Stage::kViews, l->code, {Stage::kIdentify}) + pageview_fingerprint(cfg_));
      if (!current(Stage::kViews, l->code, input)) todo.emplace_back(l, input);
    }
    if (todo.empty()) return false;

    std::map<std::string, std::vector<PageViewRecord>> records;
    if (cfg_.pageview_mode == PageviewMode::kDump) {
      std::vector<CorpusSpec> corpora;
      for (const auto& [l, _] : todo) corpora.push_back(load_corpus(l->code));
      HourlyPageviewIngester ingester(corpora, cfg_.window);
      auto files = pageview_files(cfg_.pageview_dumps);
      log("views: " + std::to_string(files.size()) + " hourly files");
      for (const auto& f : files) ingester.ingest_file(f);
      for (auto& r : ingester.records()) records[r.language].push_back(std::move(r));
      tally.merge(ingester.diagnostics());
      tally.add("matched-views", static_cast<std::size_t>(ingester.matched_views()));
    } else {
      for (const auto& [l, _] : todo) {
        log("views " + l->code);
        auto corpus = load_corpus(l->code);
        auto& out = records[l->code];
        for (const auto& [title, article] : corpus.articles) {
          for (auto& r : fetch_pageviews_api(http_, cfg_.pageview_api, l->code, article, cfg_.window)) {
            out.push_back(std::move(r));
          }
        }
      }
    }
    for (const auto& [l, input] : todo) {
      auto text = pageviews_to_json(records[l->code]);
      write_file_atomic(store_.file(Stage::kViews, l->code), text);
      store_.commit(Stage::kViews, l->code, {input, digest(text)});
    }
    return true;
  }

  // --- snapshot / score / report -----------------------------------------

  std::string snapshot(const LanguageConfig& lang) {
    auto histories = histories_from_json(read_required(store_.file(Stage::kResolve, lang.code)));
    auto pageviews = pageviews_from_json(read_required(store_.file(Stage::kViews, lang.code)));
    auto text = snapshots_to_json(build_snapshots(histories, pageviews, cfg_.window));
    write_file_atomic(store_.file(Stage::kSnapshot, lang.code), text);
    return digest(text);
  }

  std::vector<std::string> scopes() const {
    std::vector<std::string> out;
    for (const auto* l : langs_) out.push_back(l->code);
    if (cross_language_) out.emplace_back(kAllLanguagesScope);
    return out;
  }

  std::vector<const LanguageConfig*> scope_languages(const std::string& scope) const {
    if (scope == kAllLanguagesScope) return langs_;
    for (const auto* l : langs_) {
      if (l->code == scope) return {l};
    }
    return {};
  }

  fs::path series_path(const std::string& scope, ModelId model) const {
    return store_.dir(Stage::kScore) / scope / (std::string(to_string(model)) + ".json");
  }

  bool score(DiagnosticTally& tally) {
    bool ran = false;
    if (models_.size() < cfg_.models.size()) tally.add("pr2-unavailable");
    std::string models;
    for (auto m : models_) models += std::string(to_string(m)) + ",";
    for (const auto& scope : scopes()) {
      std::string input = "score\n" + config_fingerprint(cfg_) + "\n" + models;
      for (const auto* l : scope_languages(scope)) input += "\n" + store_.output_of(Stage::kSnapshot, l->code);
      input = digest(input);
      if (current(Stage::kScore, scope, input)) continue;
      log("score " + scope);
      std::vector<ArticleDaySnapshot> snaps;
      for (const auto* l : scope_languages(scope)) {
        for (auto& s : snapshots_from_json(read_required(store_.file(Stage::kSnapshot, l->code)))) {
          snaps.push_back(std::move(s));
        }
      }
      std::string digests;
      for (auto model : models_) {
        auto series = build_score_series(snaps, model, cfg_.threads);
        tally.add("series-" + std::string(to_string(model)), series.size());
        auto text = series_to_json(series);
        write_file_atomic(series_path(scope, model), text);
        digests += digest(text);
      }
      store_.commit(Stage::kScore, scope, {input, digest(digests)});
      ran = true;
    }
    return ran;
  }

  void report(DiagnosticTally& tally) {
    for (auto model : models_) {
      std::map<std::string, std::vector<ScoreSeries>> per_language;
      for (const auto& scope : scopes()) {
        auto series = series_from_json(read_required(series_path(scope, model)));
        Diagnostics warnings;
        auto rows = emit_rank_timeline(series, scope, model, cfg_.top_k, cfg_.output_dir, &warnings);
        for (const auto& w : warnings) log("warning: " + w.message);
        tally.add(warnings);
        tally.add("report-rows", rows.size());
        if (scope != kAllLanguagesScope) per_language[scope] = std::move(series);
      }
      if (cross_language_) emit_language_heatmap(per_language, model, cfg_.top_k, cfg_.output_dir);
    }
  }

  const PipelineConfig& cfg_;
  const RunOptions& opts_;
  std::vector<const LanguageConfig*> langs_;
  std::map<std::string, std::string> lang_fp_;
  bool cross_language_ = false;
  std::vector<ModelId> models_;
  HttpClient* network_;
  CachingClient http_;
  RevisionCache revision_cache_;
  StageStore store_;
  std::optional<std::map<std::string, CorpusSpec>> wikidata_;
  std::optional<PslRuleSet> psl_;
  std::size_t revision_calls_ = 0;
};

const std::map<Stage, std::vector<Stage>>& dependencies() {
  static const std::map<Stage, std::vector<Stage>> deps{
      {Stage::kIdentify, {}},
      {Stage::kFetch, {Stage::kIdentify}},
      {Stage::kExtract, {Stage::kFetch}},
      {Stage::kResolve, {Stage::kExtract}},
      {Stage::kViews, {Stage::kIdentify}},
      {Stage::kSnapshot, {Stage::kResolve, Stage::kViews}},
      {Stage::kScore, {Stage::kSnapshot}},
      {Stage::kReport, {Stage::kScore}},
  };
  return deps;
}

std::set<Stage> closure(const std::set<Stage>& targets) {
  std::set<Stage> out;
  std::vector<Stage> todo(targets.begin(), targets.end());
  while (!todo.empty()) {
    auto s = todo.back();
    todo.pop_back();
    if (!out.insert(s).second) continue;
    for (auto d : dependencies().at(s)) todo.push_back(d);
  }
  return out;
}

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::kPending: return "pending";
    case StageStatus::kCached: return "cached";
    case StageStatus::kRan: return "ran";
    case StageStatus::kFailed: return "failed";
  }
  return "?";
}

void write_manifest(const PipelineConfig& cfg, const std::vector<const LanguageConfig*>& langs,
                    const RunResult& result, const std::string& started, const std::string& finished) {
  ordered_json m;
  m["tool"] = "wikirel";
  m["version"] = std::string(library_version());
  m["started"] = started;
  m["finished"] = finished;
  m["status"] = result.ok ? "ok" : "failed";
  m["failed_stage"] = result.failed_stage ? ordered_json(std::string(to_string(*result.failed_stage)))
                                          : ordered_json(nullptr);
  m["error"] = result.error;
  m["config_fingerprint"] = config_fingerprint(cfg);
  m["window"] = {{"from", cfg.window.from.to_string()}, {"to", cfg.window.to.to_string()}};
  m["languages"] = ordered_json::array();
  for (const auto* l : langs) m["languages"].push_back(l->code);
  m["models"] = ordered_json::array();
  for (auto model : cfg.models) m["models"].push_back(std::string(to_string(model)));
  m["network_calls"] = result.network_calls;
  m["stages"] = ordered_json::array();
  for (const auto& s : result.stages) {
    ordered_json st;
    st["stage"] = std::string(to_string(s.stage));
    st["status"] = std::string(to_string(s.status));
    st["started"] = s.started;
    st["finished"] = s.finished;
    st["diagnostics"] = s.diagnostics.counts();
    m["stages"].push_back(std::move(st));
  }
  write_file_atomic(cfg.output_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  validate_config(config);
  std::vector<const LanguageConfig*> langs;
  std::vector<std::string> unknown;
  for (const auto& code : options.languages) {
    if (!config.language(code)) unknown.push_back("language '" + code + "' is not configured");
  }
  if (!unknown.empty()) throw ConfigError(std::move(unknown));
  for (const auto& l : config.languages) {
    if (options.languages.empty() || options.languages.count(l.code)) langs.push_back(&l);
  }

  std::unique_ptr<HttplibClient> transport;
  std::unique_ptr<RetryingClient> retrying;
  std::unique_ptr<RateLimitedClient> limited;
  HttpClient* network = nullptr;
  if (!options.offline) {
    if (options.network) {
      network = options.network;
    } else {
      transport = std::make_unique<HttplibClient>(config.user_agent, config.timeout);
      RetryPolicy policy;
      policy.max_attempts = config.max_attempts;
      retrying = std::make_unique<RetryingClient>(*transport, policy);
      limited = std::make_unique<RateLimitedClient>(*retrying, config.requests_per_second);
      network = limited.get();
    }
  }

  const auto started = now_utc();
  RunResult result;
  Runner runner(config, options, langs, network);
  auto wanted = closure(options.targets.empty() ? std::set<Stage>{Stage::kReport} : options.targets);
  for (auto stage : kAllStages) {
    if (!wanted.count(stage)) continue;
    StageRecord rec;
    rec.stage = stage;
    rec.started = now_utc();
    if (!result.ok) {
      rec.started.clear();
      result.stages.push_back(std::move(rec));
      continue;
    }
    try {
      rec.status = runner.run(stage, rec.diagnostics) ? StageStatus::kRan : StageStatus::kCached;
    } catch (const std::exception& e) {
      rec.status = StageStatus::kFailed;
      result.ok = false;
      result.failed_stage = stage;
      result.error = e.what();
      if (options.log) options.log("stage " + std::string(to_string(stage)) + " failed: " + e.what());
    }
    rec.finished = now_utc();
    result.stages.push_back(std::move(rec));
  }
  result.network_calls = runner.network_calls();
  write_manifest(config, langs, result, started, now_utc());
  return result;
}

}  // namespace wikirel
