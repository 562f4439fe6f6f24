#include <benchmark/benchmark.h>

#include <random>

#include "wikirel/score.h"

namespace {

using namespace wikirel;

std::vector<ArticleDaySnapshot> snapshots(int articles, int days, int domains) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, domains - 1), count(1, 8), views(0, 50000);
  std::vector<ArticleDaySnapshot> out;
  for (int a = 0; a < articles; ++a) {
    Date d = Date::from_ymd(2020, 1, 1);
    for (int t = 0; t < days; ++t, d = d.next()) {
      ArticleDaySnapshot s;
      s.article_id = "a" + std::to_string(a);
      s.date = d;
      for (int r = 0; r < 30; ++r) s.domain_counts["d" + std::to_string(pick(rng)) + ".org"] += count(rng);
      for (const auto& [_, c] : s.domain_counts) s.total_refs += c;
      s.views_all = views(rng);
      s.views_human = s.views_all / 2;
      out.push_back(std::move(s));
    }
  }
  return out;
}

void BM_ScoreDay(benchmark::State& state) {
  auto day = snapshots(static_cast<int>(state.range(0)), 1, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(score_day(day, ModelId::kPR));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * day.size()));
}
BENCHMARK(BM_ScoreDay)->Arg(100)->Arg(1000);

void BM_BuildScoreSeries(benchmark::State& state) {
  auto all = snapshots(200, 91, 500);
  for (auto _ : state) benchmark::DoNotOptimize(build_score_series(all, ModelId::kPR, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * all.size()));
}
BENCHMARK(BM_BuildScoreSeries)->Unit(benchmark::kMillisecond);

}  // namespace
