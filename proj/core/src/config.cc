#include "wikirel/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wikirel/strings.h"

namespace wikirel {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string s = "invalid configuration:";
  for (const auto& p : problems) s += "\n  " + p;
  return s;
}

// Wikipedia editions accepted in `languages`.
const std::set<std::string>& known_languages() {
  static const std::set<std::string> codes{
      "af",  "als", "am",     "an",  "ang", "ar",  "arz", "as",  "ast", "az",   "azb", "ba",
      "bar", "be",  "be-tarask", "bg", "bh", "bn", "bo",  "br",  "bs",  "ca",   "ce",  "ceb",
      "ckb", "co",  "cs",     "cv",  "cy",  "da",  "de",  "diq", "dv",  "el",   "eml", "en",
      "eo",  "es",  "et",     "eu",  "fa",  "fi",  "fo",  "fr",  "fy",  "ga",   "gan", "gd",
      "gl",  "gu",  "he",     "hi",  "hr",  "hsb", "ht",  "hu",  "hy",  "ia",   "id",  "ig",
      "ilo", "io",  "is",     "it",  "ja",  "jv",  "ka",  "kk",  "km",  "kn",   "ko",  "ku",
      "ky",  "la",  "lb",     "li",  "lmo", "lt",  "lv",  "mai", "mg",  "min",  "mk",  "ml",
      "mn",  "mr",  "mrj",    "ms",  "my",  "mzn", "nap", "nds", "ne",  "new",  "nl",  "nn",
      "no",  "oc",  "or",     "os",  "pa",  "pl",  "pms", "pnb", "ps",  "pt",   "qu",  "ro",
      "ru",  "sa",  "sah",    "sco", "sd",  "sh",  "si",  "simple", "sk", "sl", "so",  "sq",
      "sr",  "su",  "sv",     "sw",  "ta",  "te",  "tg",  "th",  "tl",  "tr",   "tt",  "uk",
      "ur",  "uz",  "vec",    "vi",  "vo",  "wa",  "war", "wuu", "xmf", "yi",   "yo",  "zh",
      "zh-min-nan", "zh-yue", "zu"};
  return codes;
}

class Section {
 public:
  Section(std::string name, const ptree* tree, std::vector<std::string>& problems)
      : name_(std::move(name)), tree_(tree), problems_(problems) {}

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return std::string(trim(it->second.data()));
  }

  template <typename T>
  std::optional<T> number(const std::string& key) {
    auto v = get(key);
    if (!v) return std::nullopt;
    T out{};
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size()) {
      problem(key, "expected a number, got '" + *v + "'");
      return std::nullopt;
    }
    return out;
  }

  std::optional<bool> boolean(const std::string& key) {
    auto v = get(key);
    if (!v) return std::nullopt;
    auto l = to_lower_ascii(*v);
    if (l == "true" || l == "yes" || l == "1") return true;
    if (l == "false" || l == "no" || l == "0") return false;
    problem(key, "expected true or false, got '" + *v + "'");
    return std::nullopt;
  }

  // `sep`-separated list with empty items dropped.
  std::optional<std::vector<std::string>> list(const std::string& key, char sep) {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<std::string> out;
    for (auto& item : split_list(*v, sep)) {
      if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
  }

  void problem(const std::string& key, const std::string& what) {
    problems_.push_back("[" + name_ + "] " + key + ": " + what);
  }

  void report_unknown_keys() {
    if (!tree_) return;
    for (const auto& [key, _] : *tree_) {
      if (!used_.count(key)) problems_.push_back("[" + name_ + "] unknown key '" + key + "'");
    }
  }

 private:
  std::string name_;
  const ptree* tree_;
  std::vector<std::string>& problems_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::pair<std::string, std::string>> split_pair(const std::string& s) {
  auto hash = s.find('#');
  if (hash == std::string::npos) return std::nullopt;
  auto a = std::string(trim(std::string_view(s).substr(0, hash)));
  auto b = std::string(trim(std::string_view(s).substr(hash + 1)));
  if (a.empty() || b.empty()) return std::nullopt;
  return std::make_pair(a, b);
}

LanguageConfig parse_language(const std::string& code, const ptree* tree, const fs::path& base,
                              std::vector<std::string>& problems) {
  Section s("lang." + code, tree, problems);
  LanguageConfig lang;
  lang.code = code;
  lang.api_endpoint = "https://" + code + ".wikipedia.org/w/api.php";
  if (auto v = s.get("source")) {
    if (*v == "dump") lang.source = SourceMode::kDump;
    else if (*v == "api") lang.source = SourceMode::kApi;
    else s.problem("source", "expected dump or api, got '" + *v + "'");
  }
  if (auto v = s.get("api")) lang.api_endpoint = *v;
  if (auto v = s.list("history_dumps", '|')) {
    for (const auto& p : *v) lang.history_dumps.push_back(resolve(base, p));
  }
  if (auto v = s.get("page_dump")) lang.page_dump = resolve(base, *v);
  if (auto v = s.get("categorylinks_dump")) lang.categorylinks_dump = resolve(base, *v);
  if (auto v = s.get("redirect_dump")) lang.redirect_dump = resolve(base, *v);
  if (auto v = s.get("corpus")) lang.corpus_file = resolve(base, *v);
  if (auto v = s.list("category_roots", '|')) {
    for (const auto& t : *v) lang.category_roots.insert(normalize_title(t));
  }
  if (auto v = s.list("category_exclusions", '|')) {
    for (const auto& t : *v) lang.category_exclusions.insert(normalize_title(t));
  }
  if (auto v = s.list("category_depth_overrides", '|')) {
    for (const auto& item : *v) {
      auto pair = split_pair(item);
      int depth = -1;
      if (pair) std::from_chars(pair->second.data(), pair->second.data() + pair->second.size(), depth);
      if (!pair || depth < 0) {
        s.problem("category_depth_overrides", "expected 'Category#depth', got '" + item + "'");
        continue;
      }
      lang.category_depth_overrides[normalize_title(pair->first)] = depth;
    }
  }
  auto& ex = lang.extraction;
  if (auto v = s.list("citation_templates", '|')) {
    ex.citations.citation_templates = {v->begin(), v->end()};
  }
  if (auto v = s.list("url_parameters", '|')) ex.citations.url_parameters = {v->begin(), v->end()};
  if (auto v = s.boolean("include_grouped_refs")) ex.citations.include_grouped_refs = *v;
  if (auto v = s.list("source_allowlist", '|')) {
    for (const auto& item : *v) {
      auto pair = split_pair(item);
      if (!pair) {
        s.problem("source_allowlist", "expected 'Template#parameter', got '" + item + "'");
        continue;
      }
      ex.allowlist.insert(*pair);
    }
  }
  if (auto v = s.number<int>("max_template_depth")) ex.max_depth = *v;
  s.report_unknown_keys();
  return lang;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const LanguageConfig* PipelineConfig::language(const std::string& code) const {
  for (const auto& l : languages) {
    if (l.code == code) return &l;
  }
  return nullptr;
}

bool is_known_language(const std::string& code) { return known_languages().count(code) > 0; }

PipelineConfig parse_config(std::istream& in, const fs::path& base_dir) {
  ptree root;
  try {
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  std::vector<std::string> problems;
  auto section = [&](const std::string& name) -> const ptree* {
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
  };

  PipelineConfig cfg;
  Section p("pipeline", section("pipeline"), problems);
  std::vector<std::string> codes;
  if (auto v = p.list("languages", ',')) codes = *v;
  auto from = p.get("from"), to = p.get("to");
  if (!from || !Date::parse(*from)) p.problem("from", "missing or not a YYYY-MM-DD date");
  else cfg.window.from = *Date::parse(*from);
  if (!to || !Date::parse(*to)) p.problem("to", "missing or not a YYYY-MM-DD date");
  else cfg.window.to = *Date::parse(*to);
  cfg.output_dir = resolve(base_dir, p.get("output_dir").value_or("out"));
  cfg.cache_dir = resolve(base_dir, p.get("cache_dir").value_or("cache"));
  if (auto v = p.get("psl")) cfg.psl_path = resolve(base_dir, *v);
  else p.problem("psl", "missing path to the public suffix list");
  if (auto v = p.boolean("psl_private_rules")) cfg.psl_private_rules = *v;
  if (auto v = p.number<unsigned>("threads")) cfg.threads = *v;
  if (auto v = p.list("models", ',')) {
    cfg.models.clear();
    for (const auto& m : *v) {
      if (auto id = parse_model_id(m)) cfg.models.push_back(*id);
      else p.problem("models", "unknown model '" + m + "'");
    }
  }
  if (auto v = p.number<int>("top_k")) cfg.top_k = *v;
  p.report_unknown_keys();

  Section id("identify", section("identify"), problems);
  if (auto v = id.list("methods", ',')) {
    cfg.methods.clear();
    for (const auto& m : *v) {
      if (auto method = parse_identify_method(m)) cfg.methods.insert(*method);
      else id.problem("methods", "unknown method '" + m + "'");
    }
  }
  if (auto v = id.number<int>("category_depth")) cfg.category_depth = *v;
  if (auto v = id.get("sparql_endpoint")) cfg.sparql_endpoint = *v;
  if (auto v = id.number<std::size_t>("sparql_batch")) cfg.sparql_batch = *v;
  if (auto v = id.list("infobox_names", '|')) cfg.infobox.infobox_names = {v->begin(), v->end()};
  if (auto v = id.get("infobox_parameter")) cfg.infobox.parameter = *v;
  if (auto v = id.get("infobox_value")) cfg.infobox.value_substring = *v;
  id.report_unknown_keys();

  Section pv("pageviews", section("pageviews"), problems);
  if (auto v = pv.get("mode")) {
    if (*v == "dump") cfg.pageview_mode = PageviewMode::kDump;
    else if (*v == "api") cfg.pageview_mode = PageviewMode::kApi;
    else pv.problem("mode", "expected dump or api, got '" + *v + "'");
  }
  if (auto v = pv.get("api")) cfg.pageview_api = *v;
  if (auto v = pv.list("dumps", '|')) {
    for (const auto& d : *v) cfg.pageview_dumps.push_back(resolve(base_dir, d));
  }
  pv.report_unknown_keys();

  Section http("http", section("http"), problems);
  cfg.user_agent = http.get("user_agent").value_or("");
  if (auto v = http.get("requests_per_second")) {
    try {
      std::size_t used = 0;
      cfg.requests_per_second = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(*v);
    } catch (const std::exception&) {
      http.problem("requests_per_second", "expected a number, got '" + *v + "'");
    }
  }
  if (auto v = http.number<int>("max_attempts")) cfg.max_attempts = *v;
  if (auto v = http.number<int>("timeout_seconds")) cfg.timeout = std::chrono::seconds(*v);
  http.report_unknown_keys();

  std::set<std::string> seen;
  for (const auto& code : codes) {
    if (!seen.insert(code).second) {
      problems.push_back("[pipeline] languages: '" + code + "' listed twice");
      continue;
    }
    cfg.languages.push_back(parse_language(code, section("lang." + code), base_dir, problems));
  }
  for (const auto& [name, _] : root) {
    static const std::set<std::string> fixed{"pipeline", "identify", "pageviews", "http"};
    if (fixed.count(name)) continue;
    if (name.rfind("lang.", 0) == 0 && seen.count(name.substr(5))) continue;
    problems.push_back("unknown or unused section [" + name + "]");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  auto base = fs::absolute(path).parent_path();
  return parse_config(in, base);
}

void validate_config(const PipelineConfig& cfg) {
  std::vector<std::string> problems;
  auto need_file = [&](const fs::path& p, const std::string& what) {
    std::error_code ec;
    if (!fs::exists(p, ec)) problems.push_back(what + ": " + p.string() + " does not exist");
  };
  if (cfg.languages.empty()) problems.push_back("no languages configured");
  if (!cfg.window.valid()) {
    problems.push_back("window start " + cfg.window.from.to_string() + " is after end " +
                       cfg.window.to.to_string());
  }
  if (cfg.psl_path.empty()) problems.push_back("psl path missing");
  else need_file(cfg.psl_path, "psl");
  if (cfg.models.empty()) problems.push_back("no models selected");
  if (cfg.top_k < 1) problems.push_back("top_k must be at least 1");
  if (cfg.category_depth < 0) problems.push_back("category_depth must be >= 0");
  if (cfg.requests_per_second <= 0) problems.push_back("requests_per_second must be positive");
  if (cfg.max_attempts < 1) problems.push_back("max_attempts must be at least 1");
  if (cfg.pageview_mode == PageviewMode::kDump) {
    if (cfg.pageview_dumps.empty()) problems.push_back("pageview dump mode needs [pageviews] dumps");
    for (const auto& p : cfg.pageview_dumps) need_file(p, "pageview dumps");
  }
  bool remote = cfg.pageview_mode == PageviewMode::kApi;
  for (const auto& lang : cfg.languages) {
    const std::string where = "[lang." + lang.code + "] ";
    if (!is_known_language(lang.code)) problems.push_back("unknown language code '" + lang.code + "'");
    if (lang.extraction.max_depth < 0) problems.push_back(where + "max_template_depth must be >= 0");
    if (lang.source == SourceMode::kDump) {
      if (lang.history_dumps.empty()) problems.push_back(where + "dump source needs history_dumps");
      for (const auto& p : lang.history_dumps) need_file(p, where + "history dump");
    } else {
      remote = true;
    }
    if (lang.corpus_file) {
      need_file(*lang.corpus_file, where + "corpus");
      continue;
    }
    if (cfg.methods.count(IdentifyMethod::kCategory)) {
      if (lang.category_roots.empty()) problems.push_back(where + "category method needs category_roots");
      if (!lang.page_dump || !lang.categorylinks_dump) {
        problems.push_back(where + "category method needs page_dump and categorylinks_dump");
      }
    }
    if (cfg.methods.count(IdentifyMethod::kWikidata)) remote = true;
    if (lang.page_dump) need_file(*lang.page_dump, where + "page dump");
    if (lang.categorylinks_dump) need_file(*lang.categorylinks_dump, where + "categorylinks dump");
    if (lang.redirect_dump) need_file(*lang.redirect_dump, where + "redirect dump");
  }
  if (remote && cfg.user_agent.empty()) {
    problems.push_back("[http] user_agent is required when remote services are used");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

namespace {

// Path plus size and modification time, so replaced inputs invalidate stages.
std::string stamp(const fs::path& p) {
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p, ec)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string s = p.string() + "/";
    for (const auto& f : files) s += "\n" + stamp(f);
    return s;
  }
  auto size = fs::file_size(p, ec);
  if (ec) return p.string();
  auto mtime = fs::last_write_time(p, ec).time_since_epoch().count();
  return p.string() + ":" + std::to_string(size) + ":" + std::to_string(mtime);
}

std::string stamp(const std::optional<fs::path>& p) { return p ? stamp(*p) : ""; }

void write_global(std::ostream& s, const PipelineConfig& cfg) {
  s << cfg.window.from.to_string() << ' ' << cfg.window.to.to_string() << ' ' << stamp(cfg.psl_path)
    << ' ' << cfg.psl_private_rules << ' ' << cfg.category_depth << ' ' << cfg.sparql_endpoint
    << '\n';
  for (auto m : cfg.methods) s << to_string(m) << ',';
  s << '\n';
  for (const auto& n : cfg.infobox.infobox_names) s << n << '|';
  s << ' ' << cfg.infobox.parameter << ' ' << cfg.infobox.value_substring << '\n';
}

}  // namespace

std::string config_fingerprint(const PipelineConfig& cfg) {
  std::ostringstream s;
  write_global(s, cfg);
  return hex64(fnv1a64(s.str()));
}

std::string pageview_fingerprint(const PipelineConfig& cfg) {
  std::ostringstream s;
  s << static_cast<int>(cfg.pageview_mode) << ' ' << cfg.pageview_api << '\n';
  for (const auto& p : cfg.pageview_dumps) s << stamp(p) << '|';
  return hex64(fnv1a64(s.str()));
}

std::string language_fingerprint(const PipelineConfig& cfg, const LanguageConfig& l) {
  std::ostringstream s;
  write_global(s, cfg);
  s << l.code << ' ' << static_cast<int>(l.source) << ' ' << l.api_endpoint << ' '
    << stamp(l.corpus_file) << ' ' << stamp(l.page_dump) << ' ' << stamp(l.categorylinks_dump)
    << ' ' << stamp(l.redirect_dump) << '\n';
  for (const auto& p : l.history_dumps) s << stamp(p) << '|';
  for (const auto& r : l.category_roots) s << r << '|';
  s << '\n';
  for (const auto& r : l.category_exclusions) s << r << '|';
  for (const auto& [r, d] : l.category_depth_overrides) s << r << '#' << d << '|';
  s << '\n';
  const auto& ex = l.extraction;
  for (const auto& t : ex.citations.citation_templates) s << t << '|';
  for (const auto& t : ex.citations.url_parameters) s << t << '|';
  s << ex.citations.include_grouped_refs << ' ' << ex.max_depth << '\n';
  for (const auto& [t, p] : ex.allowlist) s << t << '#' << p << '|';
  return hex64(fnv1a64(s.str()));
}

}  // namespace wikirel
