#include "wikirel/psl.h"

#include <gtest/gtest.h>

#include "support/psl_vectors.h"

namespace wikirel {
namespace {

const PslRuleSet& bundled() {
  static const PslRuleSet rules = PslRuleSet::load(WIKIREL_DATA_DIR "/public_suffix_list.dat");
  return rules;
}

TEST(PslRuleSet, ParseCountsRuleKinds) {
  auto a = PslRuleSet::parse("com\n// c\nco.uk");
  EXPECT_EQ(a.normal_count(), 2u);
  EXPECT_EQ(a.wildcard_count(), 0u);
  auto b = PslRuleSet::parse("*.ck\n!www.ck");
  EXPECT_EQ(b.normal_count(), 0u);
  EXPECT_EQ(b.wildcard_count(), 1u);
  EXPECT_EQ(b.exception_count(), 1u);
}

TEST(PslRuleSet, EmptyListIsAnError) {
  EXPECT_THROW(PslRuleSet::parse(""), PslError);
  EXPECT_THROW(PslRuleSet::parse("// only comments\n\n"), PslError);
  EXPECT_THROW(PslRuleSet::load("/nonexistent/psl.dat"), PslError);
}

TEST(PslRuleSet, PrivateSectionCanBeExcluded) {
  std::string text =
      "com\n// ===BEGIN PRIVATE DOMAINS===\nblogspot.com\n// ===END PRIVATE DOMAINS===\n";
  auto all = PslRuleSet::parse(text);
  auto icann = PslRuleSet::parse(text, false);
  EXPECT_EQ(registrable_domain("x.blogspot.com", all), "x.blogspot.com");
  EXPECT_EQ(registrable_domain("x.blogspot.com", icann), "blogspot.com");
}

TEST(PslRuleSet, RuleTextAfterWhitespaceIsIgnored) {
  auto rules = PslRuleSet::parse("co.uk  trailing comment\nuk");
  EXPECT_EQ(registrable_domain("www.bbc.co.uk", rules), "bbc.co.uk");
}

TEST(RegistrableDomain, BundledListVectors) {
  auto vectors = testing::load_psl_vectors(WIKIREL_TEST_DATA_DIR "/psl_test_vectors.txt");
  ASSERT_GE(vectors.size(), 50u);
  for (const auto& v : vectors) {
    EXPECT_EQ(registrable_domain(v.input, bundled()), v.expected) << v.input;
  }
}

TEST(RegistrableDomain, Idempotent) {
  for (const char* h : {"www.bbc.co.uk", "a.b.c.kobe.jp", "www.食狮.公司.cn", "news.google.com"}) {
    auto once = registrable_domain(h, bundled());
    ASSERT_TRUE(once) << h;
    EXPECT_EQ(registrable_domain(*once, bundled()), once);
  }
}

TEST(RegistrableDomain, CaseAndTrailingDotInsensitive) {
  EXPECT_EQ(registrable_domain("WWW.BBC.CO.UK.", bundled()), "bbc.co.uk");
  EXPECT_EQ(registrable_domain("www.bbc.co.uk", bundled()), "bbc.co.uk");
}

TEST(ResolveSource, Examples) {
  auto r = resolve_source("https://www.bbc.com/news/x", bundled());
  EXPECT_EQ(r.status, ResolveStatus::kOk);
  EXPECT_EQ(r.source.domain, "bbc.com");
  EXPECT_EQ(resolve_source("https://www.b.gov.pl/web/zdrowie", bundled()).source.domain, "b.gov.pl");
  EXPECT_EQ(resolve_source("http://user:pw@Example.COM:8080/a?b#c", bundled()).source.domain,
            "example.com");
}

TEST(ResolveSource, IpLiterals) {
  auto v4 = resolve_source("http://192.168.0.1/x", bundled());
  EXPECT_EQ(v4.status, ResolveStatus::kIpLiteral);
  EXPECT_EQ(v4.source.domain, "192.168.0.1");
  EXPECT_TRUE(v4.resolved());
  auto v6 = resolve_source("http://[2001:DB8::1]:80/", bundled());
  EXPECT_EQ(v6.status, ResolveStatus::kIpLiteral);
  EXPECT_EQ(v6.source.domain, "2001:db8::1");
}

TEST(ResolveSource, PublicSuffixHostIsUnresolvable) {
  auto r = resolve_source("https://co.uk/", bundled());
  EXPECT_EQ(r.status, ResolveStatus::kPublicSuffix);
  EXPECT_FALSE(r.resolved());
}

TEST(ResolveSource, InvalidUrls) {
  for (const char* u : {"ftp://x.org/", "https://", "https://a..b/", "not a url", "https://x.org:8o/",
                        "https://exa mple.org/"}) {
    EXPECT_EQ(resolve_source(u, bundled()).status, ResolveStatus::kInvalidUrl) << u;
  }
}

TEST(ResolveSource, PercentEncodedIdnHost) {
  auto r = resolve_source("http://%E9%A3%9F%E7%8B%AE.%E4%B8%AD%E5%9B%BD/", bundled());
  EXPECT_EQ(r.source.domain, "xn--85x722f.xn--fiqs8s");
}

TEST(Punycode, KnownLabels) {
  EXPECT_EQ(punycode_encode(U"食狮"), "85x722f");
  EXPECT_EQ(punycode_encode(U"公司"), "55qx5d");
  EXPECT_EQ(punycode_encode(U"中国"), "fiqs8s");
  EXPECT_EQ(punycode_encode(U"bücher"), "bcher-kva");
  EXPECT_EQ(punycode_encode(U"münchen"), "mnchen-3ya");
}

TEST(NormalizeHost, FoldsAndEncodes) {
  EXPECT_EQ(normalize_host("BÜCHER.de"), "xn--bcher-kva.de");
  EXPECT_EQ(normalize_host("Пример.рф"), "xn--e1afmkfd.xn--p1ai");
  EXPECT_EQ(normalize_host("a。b"), "a.b");
  EXPECT_EQ(normalize_host("a..b"), std::nullopt);
  EXPECT_EQ(normalize_host("."), std::nullopt);
}

}  // namespace
}  // namespace wikirel
