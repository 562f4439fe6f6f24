#include "wikirel/score.h"

#include <algorithm>

#include "parallel.h"
#include "wikirel/strings.h"

namespace wikirel {

std::string_view to_string(ModelId m) {
  switch (m) {
    case ModelId::kF: return "F";
    case ModelId::kPR: return "PR";
    case ModelId::kPR2: return "PR2";
  }
  return "?";
}

std::optional<ModelId> parse_model_id(std::string_view s) {
  auto u = to_lower_ascii(s);
  if (u == "f") return ModelId::kF;
  if (u == "pr") return ModelId::kPR;
  if (u == "pr2") return ModelId::kPR2;
  return std::nullopt;
}

DomainScores score_f(const std::vector<ArticleDaySnapshot>& day) {
  DomainScores out;
  for (const auto& snap : day) {
    for (const auto& [domain, n] : snap.domain_counts) out[domain] += static_cast<double>(n);
  }
  return out;
}

DomainScores score_pr_weighted(const std::vector<ArticleDaySnapshot>& day,
                               std::span<const double> views) {
  DomainScores out;
  for (std::size_t i = 0; i < day.size(); ++i) {
    const auto& snap = day[i];
    if (snap.total_refs <= 0) continue;
    double per_ref = views[i] / static_cast<double>(snap.total_refs);
    for (const auto& [domain, n] : snap.domain_counts) {
      out[domain] += per_ref * static_cast<double>(n);
    }
  }
  return out;
}

DomainScores score_pr(const std::vector<ArticleDaySnapshot>& day, ViewField field) {
  std::vector<double> views;
  views.reserve(day.size());
  for (const auto& snap : day) {
    views.push_back(static_cast<double>(field == ViewField::kAll ? snap.views_all
                                                                 : snap.views_human));
  }
  return score_pr_weighted(day, views);
}

DomainScores score_day(const std::vector<ArticleDaySnapshot>& day, ModelId model) {
  switch (model) {
    case ModelId::kF: return score_f(day);
    case ModelId::kPR: return score_pr(day, ViewField::kAll);
    case ModelId::kPR2: return score_pr(day, ViewField::kHuman);
  }
  return {};
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::map<YearMonth, double> aggregate_monthly(const std::map<Date, double>& daily) {
  std::map<YearMonth, double> out;
  std::vector<double> month_values;
  auto it = daily.begin();
  while (it != daily.end()) {
    auto ym = it->first.year_month();
    month_values.clear();
    for (; it != daily.end() && it->first.year_month() == ym; ++it) month_values.push_back(it->second);
    out[ym] = pairwise_sum(month_values) / static_cast<double>(month_values.size());
  }
  return out;
}

std::map<std::string, int> rank_monthly(const std::map<std::string, double>& scores) {
  std::vector<std::pair<double, const std::string*>> order;
  order.reserve(scores.size());
  for (const auto& [domain, score] : scores) order.emplace_back(score, &domain);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::map<std::string, int> ranks;
  int r = 0;
  for (const auto& [_, domain] : order) ranks[*domain] = ++r;
  return ranks;
}

std::vector<ScoreSeries> build_score_series(const std::vector<ArticleDaySnapshot>& snapshots,
                                            ModelId model, unsigned threads) {
  std::map<Date, std::vector<ArticleDaySnapshot>> by_day;
  for (const auto& s : snapshots) by_day[s.date].push_back(s);
  std::vector<const std::pair<const Date, std::vector<ArticleDaySnapshot>>*> days;
  for (const auto& entry : by_day) days.push_back(&entry);

  // Each task writes only its own slot, so the result does not depend on the
  // schedule.
  std::vector<DomainScores> daily(days.size());
  detail::parallel_for(days.size(), threads,
                       [&](std::size_t i) { daily[i] = score_day(days[i]->second, model); });

  std::map<std::string, ScoreSeries> series;
  for (std::size_t i = 0; i < days.size(); ++i) {
    for (const auto& [domain, score] : daily[i]) {
      auto& s = series[domain];
      s.daily[days[i]->first] = score;
    }
  }
  std::map<YearMonth, std::map<std::string, double>> month_scores;
  for (auto& [domain, s] : series) {
    s.domain = domain;
    s.model = model;
    s.monthly = aggregate_monthly(s.daily);
    for (const auto& [ym, v] : s.monthly) month_scores[ym][domain] = v;
  }
  for (const auto& [ym, scores] : month_scores) {
    for (const auto& [domain, rank] : rank_monthly(scores)) series[domain].monthly_rank[ym] = rank;
  }
  std::vector<ScoreSeries> out;
  out.reserve(series.size());
  for (auto& [_, s] : series) out.push_back(std::move(s));
  return out;
}

}  // namespace wikirel
