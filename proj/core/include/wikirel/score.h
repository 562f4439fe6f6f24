#ifndef WIKIREL_SCORE_H_
#define WIKIREL_SCORE_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikirel/dates.h"
#include "wikirel/ingest.h"

namespace wikirel {

enum class ModelId { kF, kPR, kPR2 };

inline constexpr ModelId kAllModels[] = {ModelId::kF, ModelId::kPR, ModelId::kPR2};

std::string_view to_string(ModelId m);
// "F", "PR", "PR2" (case-insensitive).
std::optional<ModelId> parse_model_id(std::string_view s);

enum class ViewField { kAll, kHuman };

using DomainScores = std::map<std::string, double>;

// F(s): total citations of s over the snapshots of one day.
DomainScores score_f(const std::vector<ArticleDaySnapshot>& day);

// PR(s) (all views) or PR2(s) (human views) over the snapshots of one day.
// Snapshots with no references are skipped.
DomainScores score_pr(const std::vector<ArticleDaySnapshot>& day, ViewField field);

// PR with explicit per-snapshot view weights, parallel to `day`.
DomainScores score_pr_weighted(const std::vector<ArticleDaySnapshot>& day,
                               std::span<const double> views);

DomainScores score_day(const std::vector<ArticleDaySnapshot>& day, ModelId model);

double pairwise_sum(std::span<const double> values);

// Mean per calendar month over the days present.
std::map<YearMonth, double> aggregate_monthly(const std::map<Date, double>& daily);

// Rank 1 for the highest score; equal scores are ordered by domain name, so
// the result is always a permutation of 1..k.
std::map<std::string, int> rank_monthly(const std::map<std::string, double>& scores);

struct ScoreSeries {
  std::string domain;
  ModelId model = ModelId::kF;
  std::map<Date, double> daily;
  std::map<YearMonth, double> monthly;
  std::map<YearMonth, int> monthly_rank;

  bool operator==(const ScoreSeries&) const = default;
};

// Scores every day present in `snapshots`, aggregates per month and ranks
// the domains of each month. Days are scored on `threads` workers
// (0 = hardware concurrency). Sorted by domain.
std::vector<ScoreSeries> build_score_series(const std::vector<ArticleDaySnapshot>& snapshots,
                                            ModelId model, unsigned threads = 0);

}  // namespace wikirel

#endif  // WIKIREL_SCORE_H_
