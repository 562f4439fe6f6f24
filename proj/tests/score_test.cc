#include "wikirel/score.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace wikirel {
namespace {

Date day(const char* s) { return *Date::parse(s); }

ArticleDaySnapshot snap(const char* article, std::int64_t total,
                        std::map<std::string, std::int64_t> counts, std::int64_t views = 0,
                        std::int64_t human = 0, const char* date = "2020-03-01") {
  return {article, day(date), total, std::move(counts), views, human};
}

TEST(ScoreF, CountsFrequency) {
  EXPECT_EQ(score_f({snap("a", 4, {{"d", 4}})}).at("d"), 4.0);
  EXPECT_TRUE(score_f({}).empty());
  EXPECT_EQ(score_f({snap("a", 2, {{"d", 2}}), snap("b", 3, {{"d", 3}})}).at("d"), 5.0);
}

TEST(ScorePr, WeighsByViewsPerReference) {
  EXPECT_DOUBLE_EQ(score_pr({snap("a", 10, {{"d", 2}}, 100)}, ViewField::kAll).at("d"), 20.0);
  auto zero = score_pr({snap("a", 10, {{"d", 2}, {"e", 8}}, 0), snap("b", 1, {{"d", 1}}, 0)},
                       ViewField::kAll);
  for (const auto& [_, v] : zero) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(zero.size(), 2u);
  EXPECT_DOUBLE_EQ(score_pr({snap("a", 6, {{"d", 1}}, 60), snap("b", 3, {{"d", 3}}, 30)},
                            ViewField::kAll)
                       .at("d"),
                   40.0);
}

TEST(ScorePr, SkipsArticlesWithoutReferences) {
  auto s = score_pr({snap("a", 0, {}, 100)}, ViewField::kAll);
  EXPECT_TRUE(s.empty());
}

TEST(ScorePr, HumanViewsForPr2) {
  auto day_ = std::vector{snap("a", 4, {{"d", 1}, {"e", 3}}, 400, 100)};
  EXPECT_DOUBLE_EQ(score_day(day_, ModelId::kPR).at("d"), 100.0);
  EXPECT_DOUBLE_EQ(score_day(day_, ModelId::kPR2).at("d"), 25.0);
  EXPECT_DOUBLE_EQ(score_day(day_, ModelId::kF).at("e"), 3.0);
}

TEST(Monthly, MeanOverPresentDays) {
  auto m = aggregate_monthly({{day("2020-03-01"), 2}, {day("2020-03-05"), 4}});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.at({2020, 3}), 3.0);
  EXPECT_EQ(aggregate_monthly({{day("2020-04-07"), 1.25}}).at({2020, 4}), 1.25);
  std::map<Date, double> flat;
  for (Date d = day("2020-04-01"); d <= day("2020-04-30"); d = d.next()) flat[d] = 0.1;
  EXPECT_DOUBLE_EQ(aggregate_monthly(flat).at({2020, 4}), 0.1);
}

TEST(Monthly, SplitsCalendarMonths) {
  auto m = aggregate_monthly(
      {{day("2020-01-31"), 1}, {day("2020-02-01"), 5}, {day("2020-02-29"), 7}, {day("2021-01-01"), 9}});
  EXPECT_EQ(m, (std::map<YearMonth, double>{{{2020, 1}, 1}, {{2020, 2}, 6}, {{2021, 1}, 9}}));
}

TEST(PairwiseSum, MatchesExactSumForManySmallTerms) {
  std::vector<double> v(1 << 20, 0.1);
  double naive = 0;
  for (double x : v) naive += x;
  double exact = 0.1 * v.size();
  EXPECT_LT(std::abs(pairwise_sum(v) - exact), std::abs(naive - exact));
  EXPECT_NEAR(pairwise_sum(v), exact, 1e-9);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Rank, DescendingWithNameTieBreak) {
  EXPECT_EQ(rank_monthly({{"a", 5}, {"b", 3}}), (std::map<std::string, int>{{"a", 1}, {"b", 2}}));
  EXPECT_EQ(rank_monthly({{"a", 5}, {"b", 5}}), (std::map<std::string, int>{{"a", 1}, {"b", 2}}));
  EXPECT_EQ(rank_monthly({{"z", 0}}), (std::map<std::string, int>{{"z", 1}}));
  EXPECT_EQ(rank_monthly({{"b", 1}, {"a", 1}, {"c", 2}}),
            (std::map<std::string, int>{{"c", 1}, {"a", 2}, {"b", 3}}));
}

TEST(Model, NamesRoundTrip) {
  for (auto m : kAllModels) EXPECT_EQ(parse_model_id(to_string(m)), m);
  EXPECT_EQ(parse_model_id("pr2"), ModelId::kPR2);
  EXPECT_EQ(parse_model_id("PR3"), std::nullopt);
}

TEST(Series, DailyMonthlyAndRanks) {
  std::vector<ArticleDaySnapshot> snaps{
      snap("a", 2, {{"x.org", 2}}, 10, 0, "2020-01-30"),
      snap("a", 2, {{"x.org", 1}, {"y.org", 1}}, 10, 0, "2020-01-31"),
      snap("b", 3, {{"y.org", 3}}, 30, 0, "2020-01-31"),
      snap("a", 1, {{"y.org", 1}}, 10, 0, "2020-02-01"),
  };
  auto f = build_score_series(snaps, ModelId::kF, 1);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].domain, "x.org");
  EXPECT_EQ(f[0].daily, (std::map<Date, double>{{day("2020-01-30"), 2}, {day("2020-01-31"), 1}}));
  EXPECT_EQ(f[0].monthly.at({2020, 1}), 1.5);
  EXPECT_EQ(f[0].monthly.count({2020, 2}), 0u);  // not cited in February
  EXPECT_EQ(f[1].monthly.at({2020, 1}), 4.0);     // only the day it is cited counts
  EXPECT_EQ(f[1].monthly_rank.at({2020, 1}), 1);
  EXPECT_EQ(f[0].monthly_rank.at({2020, 1}), 2);
  EXPECT_EQ(f[1].monthly_rank.at({2020, 2}), 1);

  auto pr = build_score_series(snaps, ModelId::kPR, 3);
  EXPECT_DOUBLE_EQ(pr[1].daily.at(day("2020-01-31")), 5.0 + 30.0);
}

// --- properties against an independent evaluator -------------------------

struct Instance {
  std::vector<ArticleDaySnapshot> day;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_articles(0, 20), n_domains(1, 10), count(0, 50),
      extra(0, 20);
  std::uniform_int_distribution<std::int64_t> views(0, 1'000'000);
  Instance inst;
  int domains = n_domains(rng);
  int n = n_articles(rng);
  for (int i = 0; i < n; ++i) {
    ArticleDaySnapshot s;
    s.article_id = "article" + std::to_string(i);
    s.date = day("2020-03-01");
    for (int d = 0; d < domains; ++d) {
      int c = count(rng) < 20 ? count(rng) : 0;
      if (c > 0) s.domain_counts["d" + std::to_string(d) + ".org"] = c;
    }
    s.total_refs = extra(rng);
    for (const auto& [_, c] : s.domain_counts) s.total_refs += c;
    s.views_all = views(rng);
    s.views_human = std::uniform_int_distribution<std::int64_t>(0, s.views_all)(rng);
    inst.day.push_back(std::move(s));
  }
  return inst;
}

// Evaluates the sums domain by domain with long double accumulation.
std::map<std::string, long double> oracle(const Instance& inst, ModelId model) {
  std::set<std::string> domains;
  for (const auto& s : inst.day)
    for (const auto& [d, _] : s.domain_counts) domains.insert(d);
  std::map<std::string, long double> out;
  for (const auto& d : domains) {
    long double sum = 0;
    for (const auto& s : inst.day) {
      auto it = s.domain_counts.find(d);
      long double cs = it == s.domain_counts.end() ? 0 : it->second;
      if (model == ModelId::kF) {
        sum += cs;
      } else if (s.total_refs > 0) {
        long double v = model == ModelId::kPR ? s.views_all : s.views_human;
        sum += v * cs / s.total_refs;
      }
    }
    out[d] = sum;
  }
  return out;
}

TEST(ScoreProperties, MatchesOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_instance(rng);
    for (auto model : kAllModels) {
      auto got = score_day(inst.day, model);
      auto want = oracle(inst, model);
      ASSERT_EQ(got.size(), want.size());
      for (const auto& [d, w] : want) {
        double g = got.at(d);
        EXPECT_LE(std::abs(g - static_cast<double>(w)), 1e-9 * std::max(1.0L, std::abs(w)));
      }
    }
  }
}

TEST(ScoreProperties, Pr2EqualsPrWhenAllViewsAreHuman) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_instance(rng);
    for (auto& s : inst.day) s.views_human = s.views_all;
    EXPECT_EQ(score_day(inst.day, ModelId::kPR), score_day(inst.day, ModelId::kPR2));
  }
}

TEST(ScoreProperties, ScalingViewsScalesPr) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_instance(rng);
    std::vector<double> views;
    for (const auto& s : inst.day) views.push_back(static_cast<double>(s.views_all));
    auto base = score_pr_weighted(inst.day, views);
    for (double k : {0.5, 2.0, 10.0}) {
      std::vector<double> scaled;
      for (double v : views) scaled.push_back(v * k);
      auto s = score_pr_weighted(inst.day, scaled);
      for (const auto& [d, v] : base) EXPECT_NEAR(s.at(d), k * v, 1e-9 * std::max(1.0, k * v));
      EXPECT_EQ(rank_monthly(s), rank_monthly(base));
    }
  }
}

TEST(ScoreProperties, AdditiveOverDisjointArticleSets) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_instance(rng), b = random_instance(rng);
    for (auto& s : b.day) s.article_id += "b";
    auto both = a.day;
    both.insert(both.end(), b.day.begin(), b.day.end());
    for (auto model : {ModelId::kF, ModelId::kPR}) {
      auto sa = score_day(a.day, model), sb = score_day(b.day, model),
           sab = score_day(both, model);
      for (const auto& [d, v] : sab) {
        double expect = (sa.count(d) ? sa.at(d) : 0) + (sb.count(d) ? sb.at(d) : 0);
        EXPECT_NEAR(v, expect, 1e-9 * std::max(1.0, expect));
      }
    }
  }
}

TEST(ScoreProperties, MonotoneInDomainAndTotalCounts) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = random_instance(rng);
    if (inst.day.empty() || inst.day[0].domain_counts.empty()) continue;
    auto base = score_day(inst.day, ModelId::kPR);
    auto d = inst.day[0].domain_counts.begin()->first;

    auto more_cs = inst;
    more_cs.day[0].domain_counts[d] += 1;  // C(i) held fixed
    EXPECT_GE(score_day(more_cs.day, ModelId::kPR).at(d), base.at(d));

    auto more_c = inst;
    more_c.day[0].total_refs += 5;
    EXPECT_LE(score_day(more_c.day, ModelId::kPR).at(d), base.at(d));
  }
}

TEST(ScoreProperties, RanksArePermutations) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, double> scores;
    int k = 1 + trial % 15;
    for (int i = 0; i < k; ++i) scores["d" + std::to_string(i)] = std::floor(u(rng));
    std::set<int> ranks;
    for (const auto& [_, r] : rank_monthly(scores)) ranks.insert(r);
    EXPECT_EQ(ranks.size(), static_cast<std::size_t>(k));
    EXPECT_EQ(*ranks.begin(), 1);
    EXPECT_EQ(*ranks.rbegin(), k);
  }
}

TEST(ScoreProperties, ThreadCountDoesNotChangeSeries) {
  std::mt19937_64 rng(29);
  std::vector<ArticleDaySnapshot> snaps;
  for (Date d = day("2020-01-01"); d <= day("2020-03-31"); d = d.next()) {
    for (auto s : random_instance(rng).day) {
      s.date = d;
      snaps.push_back(std::move(s));
    }
  }
  for (auto model : kAllModels) {
    EXPECT_EQ(build_score_series(snaps, model, 1), build_score_series(snaps, model, 4));
  }
}

}  // namespace
}  // namespace wikirel
