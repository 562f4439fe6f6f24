#ifndef WIKIREL_CONFIG_H_
#define WIKIREL_CONFIG_H_

#include <chrono>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wikirel/corpus.h"
#include "wikirel/dates.h"
#include "wikirel/score.h"
#include "wikirel/wikitext.h"

namespace wikirel {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Where revisions (and, for dump sources, redirects and infobox candidates)
// come from.
enum class SourceMode { kDump, kApi };
enum class PageviewMode { kDump, kApi };

struct LanguageConfig {
  std::string code;
  SourceMode source = SourceMode::kApi;
  std::string api_endpoint;  // https://<code>.wikipedia.org/w/api.php by default
  std::vector<std::filesystem::path> history_dumps;
  std::optional<std::filesystem::path> page_dump;
  std::optional<std::filesystem::path> categorylinks_dump;
  std::optional<std::filesystem::path> redirect_dump;
  // A prepared corpus (JSON as written by the identify stage) replacing
  // identification for this language.
  std::optional<std::filesystem::path> corpus_file;
  std::set<std::string> category_roots;
  std::set<std::string> category_exclusions;
  std::map<std::string, int> category_depth_overrides;
  ExtractionSettings extraction;
};

struct PipelineConfig {
  std::vector<LanguageConfig> languages;
  DateRange window;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
  std::filesystem::path psl_path;
  bool psl_private_rules = true;

  std::set<IdentifyMethod> methods{IdentifyMethod::kCategory, IdentifyMethod::kWikidata,
                                   IdentifyMethod::kInfobox};
  int category_depth = kDefaultCategoryDepth;
  std::string sparql_endpoint = "https://query.wikidata.org/sparql";
  std::size_t sparql_batch = 200;
  InfoboxCriteria infobox;

  PageviewMode pageview_mode = PageviewMode::kApi;
  std::string pageview_api = "https://wikimedia.org/api/rest_v1/metrics/pageviews";
  // Hourly dump files, or directories searched for pageviews-* files.
  std::vector<std::filesystem::path> pageview_dumps;

  std::string user_agent;
  double requests_per_second = 5.0;
  int max_attempts = 5;
  std::chrono::seconds timeout{60};
  unsigned threads = 0;

  std::vector<ModelId> models{ModelId::kF, ModelId::kPR, ModelId::kPR2};
  int top_k = 10;

  const LanguageConfig* language(const std::string& code) const;
};

// Reads the INI config. Relative paths are resolved against the directory of
// the file. Throws ConfigError listing every problem found.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);

// Checks cross-field rules (window, languages, required inputs per mode,
// readable paths). Throws ConfigError.
void validate_config(const PipelineConfig& config);

bool is_known_language(const std::string& code);

// Stable digests of the settings that determine stage outputs: the shared
// settings alone, and the shared settings plus one language's.
std::string config_fingerprint(const PipelineConfig& config);
std::string language_fingerprint(const PipelineConfig& config, const LanguageConfig& language);
// Page view mode and inputs, which only the views stage reads.
std::string pageview_fingerprint(const PipelineConfig& config);

}  // namespace wikirel

#endif  // WIKIREL_CONFIG_H_
