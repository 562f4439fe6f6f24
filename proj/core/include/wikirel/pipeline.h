#ifndef WIKIREL_PIPELINE_H_
#define WIKIREL_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wikirel/config.h"
#include "wikirel/diagnostics.h"
#include "wikirel/http.h"
#include "wikirel/score.h"

namespace wikirel {

std::string_view library_version();

enum class Stage { kIdentify, kFetch, kExtract, kResolve, kViews, kSnapshot, kScore, kReport };

inline constexpr Stage kAllStages[] = {Stage::kIdentify, Stage::kFetch,    Stage::kExtract,
                                       Stage::kResolve,  Stage::kViews,    Stage::kSnapshot,
                                       Stage::kScore,    Stage::kReport};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct RunOptions {
  // These stages and everything they depend on are run (all when empty);
  // stages whose artifacts are current are reused.
  std::set<Stage> targets;
  // Stages rerun even when their artifacts are current.
  std::set<Stage> force;
  // Only these languages (all configured ones when empty). The cross-language
  // scope is computed only when every configured language is included.
  std::set<std::string> languages;
  // Cache-only: any request missing from the cache fails the stage.
  bool offline = false;
  // Replaces the network client built from the config (tests).
  HttpClient* network = nullptr;
  std::function<void(std::string_view)> log;
};

enum class StageStatus { kPending, kCached, kRan, kFailed };

struct StageRecord {
  Stage stage = Stage::kIdentify;
  StageStatus status = StageStatus::kPending;
  std::string started;
  std::string finished;
  DiagnosticTally diagnostics;
};

struct RunResult {
  bool ok = true;
  std::optional<Stage> failed_stage;
  std::string error;
  std::vector<StageRecord> stages;
  std::size_t network_calls = 0;
};

// Runs the stages in order, persisting each stage's output under
// <output>/stages and the reports under <output>/reports, then writes
// <output>/manifest.json. Stage failures are reported in the result and
// the manifest, not thrown. Throws ConfigError for an invalid config.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

// Series of one scope and model as written by the score stage.
std::string series_to_json(const std::vector<ScoreSeries>& series);
std::vector<ScoreSeries> series_from_json(std::string_view text);

}  // namespace wikirel

#endif  // WIKIREL_PIPELINE_H_
