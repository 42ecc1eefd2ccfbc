#include <gtest/gtest.h>

#include <fstream>
#include <limits>
#include <sstream>

#include "scamrank/encode.hpp"
#include "scamrank/featurizer.hpp"
#include "scamrank/segment.hpp"

using namespace scamrank;

namespace {

std::size_t slot(const std::string& name) {
  const auto& s = oracle_schema();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].name == name) return i;
  throw std::out_of_range(name);
}

double num(const FeatureVector& v, const std::string& name) { return std::get<double>(v.values.at(slot(name))); }

DomainSnapshot snap(const std::string& url) {
  DomainSnapshot s;
  s.url = url;
  s.final_url = url;
  s.html = "<html><body>hello</body></html>";
  return s;
}

// Minimum cost over every way of cutting `s`, by enumeration of all 2^(n-1)
// cut masks.
double brute_force_cost(const WordSegmenter& seg, const std::string& s) {
  const std::size_t n = s.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    double cost = 0.0;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == n || (mask >> (i - 1)) & 1u) {
        cost += seg.token_cost(s.substr(start, i - start));
        start = i;
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace

TEST(Schema, Has103TypedSlots) {
  EXPECT_EQ(oracle_schema().size(), kOracleFeatureCount);
  std::set<std::string> names;
  for (auto& f : oracle_schema()) names.insert(f.name);
  EXPECT_EQ(names.size(), kOracleFeatureCount);
}

TEST(Schema, ReferenceTableNamesInOrder) {
  std::ifstream in(std::string(SCAMRANK_TEST_DATA) + "/reference_features.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, kind;
    ls >> name >> kind;
    ASSERT_LT(i, oracle_schema().size());
    EXPECT_EQ(oracle_schema()[i].name, name) << "slot " << i;
    auto k = oracle_schema()[i].kind;
    EXPECT_EQ(kind, k == FeatureKind::Boolean ? "B" : k == FeatureKind::Numeric ? "N" : "C") << name;
    ++i;
  }
  EXPECT_EQ(i, 62u);
}

TEST(Schema, CheckedInFileMatches) {
  auto file = nlohmann::json::parse(read_file(data_dir() / "schema.json"));
  EXPECT_EQ(file, schema_to_json(oracle_schema()));
  EXPECT_EQ(schema_from_json(file), oracle_schema());
}

TEST(Featurizer, MxRecordsCounted) {
  auto s = snap("https://example.com/");
  s.dns["MX"] = {"mx1.example.com", "mx2.example.com"};
  auto v = Featurizer::bundled().extract(s);
  EXPECT_EQ(num(v, "dns_has_mx"), 1.0);
  EXPECT_EQ(num(v, "dns_num_mx"), 2.0);
}

TEST(Featurizer, UrlLexicalFlags) {
  auto v = Featurizer::bundled().extract(snap("https://best-shoes4u.com/"));
  EXPECT_EQ(num(v, "url_has_hyphen"), 1.0);
  EXPECT_EQ(num(v, "url_has_digit"), 1.0);
  EXPECT_EQ(num(v, "url_subdomain_count"), 0.0);
}

TEST(Featurizer, DomainAgeInDays) {
  auto s = snap("https://example.com/");
  s.whois.created = parse_date("2024-01-01");
  s.fetched_at = parse_timestamp("2024-03-01T00:00:00Z");
  EXPECT_EQ(num(Featurizer::bundled().extract(s), "domain_age"), 60.0);
}

TEST(Featurizer, AbsentWhoisIsMissing) {
  auto v = Featurizer::bundled().extract(snap("https://example.com/"));
  EXPECT_TRUE(is_missing(v.values[slot("domain_age")]));
  validate(v, oracle_schema());
}

TEST(Featurizer, DeterministicAndValid) {
  auto s = snap("https://www.cheap-nike-outlet.shop/sale");
  s.html = "<html><head><title>Sale</title></head><body><a href='http://1.2.3.4/x'>x</a><iframe></iframe>"
           "<img src=a.png><p>Pay with bitcoin</p></body></html>";
  auto a = Featurizer::bundled().extract(s);
  auto b = Featurizer::bundled().extract(s);
  EXPECT_EQ(a, b);
  validate(a, oracle_schema());
  EXPECT_EQ(num(a, "num_iframe_tags"), 1.0);
  EXPECT_EQ(num(a, "num_links_with_ip"), 1.0);
}

TEST(Featurizer, CsvRoundTrip) {
  FeatureTable t;
  for (auto url : {"https://a-1.com/", "https://b.shop/"}) {
    t.keys.push_back(url);
    t.vectors.push_back(Featurizer::bundled().extract(snap(url)));
  }
  auto back = features_from_csv(features_to_csv(t));
  EXPECT_EQ(back.keys, t.keys);
  EXPECT_EQ(back.vectors, t.vectors);
}

TEST(Segmenter, KnownSplits) {
  const auto& seg = WordSegmenter::bundled();
  auto a = seg.split("cheapnikeshoes");
  EXPECT_EQ(a.words, (std::vector<std::string>{"cheap", "nike", "shoes"}));
  EXPECT_EQ(seg.split("shoes").count(), 1u);
  auto r = seg.split("xqzt9");
  EXPECT_EQ(r.words, (std::vector<std::string>{"xqzt9"}));
}

TEST(Segmenter, MatchesExhaustiveSearch) {
  const auto& seg = WordSegmenter::bundled();
  for (std::string s : {"cheapnikeshoes", "bestshoes4u", "xqzt9", "replicawatches", "freebitcoin", "shopnowonline",
                        "mybankloginxx", "a", "trailrunning", "qqqqwwwweeee"}) {
    auto got = seg.split(s);
    double cost = 0.0;
    std::string joined;
    for (auto& w : got.words) {
      cost += seg.token_cost(w);
      joined += w;
    }
    EXPECT_EQ(joined, s);
    EXPECT_NEAR(got.cost, cost, 1e-9);
    EXPECT_NEAR(got.cost, brute_force_cost(seg, s), 1e-9) << s;
  }
}

TEST(Encode, UnseenCategoryGetsCodeZero) {
  auto s1 = snap("https://a.com/");
  s1.whois.registrar = "GoDaddy";
  auto s2 = snap("https://b.com/");
  s2.whois.registrar = "NeverSeenRegistrar";
  std::vector<FeatureVector> train{Featurizer::bundled().extract(s1)};
  auto m = encode_dataset(train, std::nullopt);
  std::vector<FeatureVector> test{Featurizer::bundled().extract(s2)};
  auto t = encode_with(m.encoding, test);
  EXPECT_EQ(t.at(0, slot("registrar_name")), 0.0);
  EXPECT_GT(m.at(0, slot("registrar_name")), 0.0);
}

TEST(Encode, NoMissingMeansZeroIndicators) {
  FeatureVector v;
  for (auto& f : oracle_schema()) v.values.push_back(f.kind == FeatureKind::Categorical ? FeatureValue(std::string("x")) : FeatureValue(1.0));
  std::vector<FeatureVector> rows{v, v};
  auto m = encode_dataset(rows, std::nullopt);
  for (std::size_t c = 0; c < m.cols; ++c)
    if (m.encoding.columns[c].indicator_of) EXPECT_EQ(m.at(0, c), 0.0);
}

TEST(Encode, BitExactAcrossRuns) {
  std::vector<FeatureVector> rows;
  for (auto url : {"https://a.com/", "https://x-y.shop/", "http://1.2.3.4/"})
    rows.push_back(Featurizer::bundled().extract(snap(url)));
  auto a = encode_dataset(rows, std::vector<int>{1, 0, 1});
  auto b = encode_dataset(rows, std::vector<int>{1, 0, 1});
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.missing, b.missing);
  EXPECT_EQ(encoding_from_json(encoding_to_json(a.encoding)), a.encoding);
}
