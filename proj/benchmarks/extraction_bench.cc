#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "wikirel/wikitext.h"

namespace {

using namespace wikirel;

std::string article(std::size_t target) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> kind(0, 4), site(0, 99);
  std::string text;
  int n = 0;
  while (text.size() < target) {
    text += "Cases were reported by the ministry of health during the outbreak. ";
    std::string host = "https://site" + std::to_string(site(rng)) + ".example.org/";
    switch (kind(rng)) {
      case 0:
        text += "<ref>{{cite web|url=" + host + std::to_string(n) + "|title=T}}</ref>";
        break;
      case 1:
        text += "<ref name=\"n" + std::to_string(n) + "\">[" + host + " t]</ref>";
        break;
      case 2:
        text += "<ref name=\"n" + std::to_string(n / 2) + "\" />";
        break;
      case 3:
        text += "{{Data}}";
        break;
      default:
        text += "<ref>" + host + "</ref>";
    }
    ++n;
  }
  return text;
}

TemplateStore store() {
  TemplateStore::Builder b;
  b.add_revision("Data", *parse_timestamp("2020-01-01T00:00:00Z"),
                 "<ref>https://data.example.org</ref>");
  return std::move(b).build();
}

void BM_ExtractRevision(benchmark::State& state) {
  RevisionText rev{"A", "en", *parse_timestamp("2020-03-01T00:00:00Z"),
                   article(static_cast<std::size_t>(state.range(0)))};
  auto templates = store();
  ExtractionSettings settings;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_revision(rev, templates, settings));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * rev.wikitext.size()));
}
BENCHMARK(BM_ExtractRevision)->Arg(10 << 10)->Arg(100 << 10)->Arg(1 << 20);

void BM_ExpandTransclusions(benchmark::State& state) {
  RevisionText rev{"A", "en", *parse_timestamp("2020-03-01T00:00:00Z"), article(100 << 10)};
  auto templates = store();
  for (auto _ : state) benchmark::DoNotOptimize(expand_transclusions(rev, templates));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * rev.wikitext.size()));
}
BENCHMARK(BM_ExpandTransclusions);

}  // namespace
