#include <gtest/gtest.h>

#include <fstream>

#include "scamrank/corpus.hpp"
#include "scamrank/public_suffix.hpp"

using namespace scamrank;

TEST(Snapshot, MissingBlocksMapToNull) {
  auto s = parse_snapshot(R"({"url": "https://shop.example.com/", "html": "<p>hi</p>"})");
  EXPECT_TRUE(s.dns.empty());
  EXPECT_FALSE(s.whois.created);
  EXPECT_FALSE(s.whois.registrar);
  EXPECT_FALSE(s.ranks.tranco);
  EXPECT_EQ(s.http_status, 200);
}

TEST(Snapshot, StatusZeroIsNonResolving) {
  auto s = parse_snapshot(R"({"url": "http://gone.example", "html": "", "http_status": 0})");
  EXPECT_TRUE(s.non_resolving());
  EXPECT_EQ(ParkedDetector::bundled().check(s), PageState::Unreachable);
  EXPECT_FALSE(ParkedDetector::bundled().admits(s));
}

TEST(Snapshot, FullRecordRoundTrips) {
  const char* line = R"({"url":"https://www.best-shoes4u.com/","fetched_at":"2024-03-01T08:30:00Z","http_status":200,
    "final_url":"https://www.best-shoes4u.com/home","html":"<title>x</title>",
    "dns":{"A":["1.2.3.4"],"MX":["mx1.x.com","mx2.x.com"]},
    "whois":{"created":"2024-01-01","expires":"2025-01-01","registrar":"NameSilo","registrar_country":"US",
             "registrant_country":"CN","privacy":true,"registrant_email_domain":"gmail.com"},
    "ranks":{"tranco":12345,"majestic":null,"majestic_refips":3,"majestic_refsubnets":2,"majestic_tldrank":9,"cisco":null}})";
  auto a = parse_snapshot(line);
  auto b = parse_snapshot(snapshot_to_json(a).dump());
  EXPECT_EQ(a, b);
  EXPECT_EQ(*a.ranks.tranco, 12345);
  EXPECT_EQ(a.dns.at("MX").size(), 2u);
}

TEST(Snapshot, MalformedLineReportsLine) {
  try {
    parse_snapshot("{not json", 7);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(Parked, FixtureCorpusHasNoFalseNegatives) {
  auto path = data_dir() / "fixtures" / "parked_pages.jsonl";
  std::ifstream in(path);
  ASSERT_TRUE(in);
  std::string line;
  int parked = 0, missed = 0, false_alarms = 0, total = 0;
  const auto& det = ParkedDetector::bundled();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    DomainSnapshot s;
    s.url = "https://" + j["id"].get<std::string>() + ".example/";
    s.html = j["html"].get<std::string>();
    bool truth = j["parked"].get<bool>();
    bool flagged = det.check(s) == PageState::Parked;
    ++total;
    parked += truth;
    missed += truth && !flagged;
    false_alarms += !truth && flagged;
  }
  EXPECT_EQ(total, 50);
  EXPECT_EQ(parked, 25);
  EXPECT_EQ(missed, 0);
  EXPECT_EQ(false_alarms, 0);
}

TEST(Parked, StorefrontIsLive) {
  DomainSnapshot s;
  s.url = "https://shop.example.com";
  s.html = "<html><body><h1>Summer collection</h1><p>Free shipping on orders over $50.</p></body></html>";
  EXPECT_EQ(ParkedDetector::bundled().check(s), PageState::Live);
  EXPECT_TRUE(ParkedDetector::bundled().admits(s));
}

TEST(Keywords, LowercasedAndTrimmed) {
  auto k = parse_keyword(R"({"text":"  Nike AIR Max ","source_domain":"x.com","category":"fashion","competition":"LOW"})");
  EXPECT_EQ(k.text, "nike air max");
  EXPECT_EQ(k.competition, Competition::Low);
  EXPECT_EQ(parse_keyword(keyword_to_json(k).dump()), k);
}

TEST(Serp, DuplicateEngineRankRejected) {
  SerpResultSet s;
  s.query = "q";
  s.entries = {{Engine::Google, 1, "https://a.com", "a.com", "", ""}, {Engine::Google, 1, "https://b.com", "b.com", "", ""}};
  EXPECT_THROW(s.normalize(), SchemaError);
}

TEST(Labels, DuplicatesRejected) {
  EXPECT_THROW(parse_labels("a.com,scam,x\na.com,benign,x\n"), Error);
  auto l = parse_labels("root_domain,label,category\na.com,scam,fashion\n");
  ASSERT_EQ(l.size(), 1u);
  EXPECT_EQ(l[0].label, Label::Scam);
}

TEST(Engine, UnknownNameThrows) { EXPECT_THROW(parse_engine("altavista"), UnknownEngine); }

TEST(RootDomain, PublicSuffixRules) {
  const auto& psl = PublicSuffixList::bundled();
  EXPECT_EQ(psl.root_domain("https://shop.example.co.uk/x"), "example.co.uk");
  EXPECT_EQ(psl.root_domain("http://a.b.example.com"), "example.com");
  EXPECT_EQ(psl.root_domain("http://example.com"), psl.root_domain("https://www.example.com/p"));
}

TEST(RootDomain, WildcardAndException) {
  auto psl = PublicSuffixList::from_string("com\n*.ck\n!www.ck\n");
  EXPECT_EQ(psl.root_domain("http://a.b.foo.ck"), "b.foo.ck");
  EXPECT_EQ(psl.root_domain("http://www.ck"), "www.ck");
  EXPECT_THROW(psl.root_domain("not a url"), UrlError);
}
