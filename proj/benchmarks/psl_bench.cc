#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wikirel/psl.h"

namespace {

using namespace wikirel;

void BM_ResolveSource(benchmark::State& state) {
  static const auto rules = PslRuleSet::load(WIKIREL_DATA_DIR "/public_suffix_list.dat");
  const std::vector<std::string> urls = {
      "https://www.who.int/emergencies/diseases/novel-coronavirus-2019",
      "https://www.bbc.co.uk/news/world-51235105",
      "http://news.example.kawasaki.jp/a",
      "https://gov.pl/web/koronawirus",
      "https://user.github.io/covid/",
  };
  for (auto _ : state) {
    for (const auto& u : urls) benchmark::DoNotOptimize(resolve_source(u, rules));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * urls.size()));
}
BENCHMARK(BM_ResolveSource);

}  // namespace
