#include <gtest/gtest.h>

#include <random>
#include <set>

#include "scamrank/toxicity.hpp"

using namespace scamrank;

namespace {

SerpResultSet serp_of(const std::vector<std::string>& domains) {
  SerpResultSet s;
  s.query = "q";
  int rank = 0;
  for (auto& d : domains) s.entries.push_back({Engine::Google, ++rank, "https://" + d + "/", d, "", ""});
  return s;
}

}  // namespace

TEST(Toxicity, SixOfTwenty) {
  std::vector<std::string> d;
  VerdictMap v;
  for (int i = 0; i < 20; ++i) {
    d.push_back("d" + std::to_string(i) + ".com");
    v[d.back()] = i < 6 ? Label::Scam : Label::Benign;
  }
  auto q = score_serp(serp_of(d), v);
  EXPECT_EQ(q.toxicity, 0.3);
  EXPECT_EQ(q.expansion, 6);
  EXPECT_EQ(q.total_sites, 20);
}

TEST(Toxicity, NoScams) {
  auto q = score_serp(serp_of({"a.com", "b.com"}), {{"a.com", Label::Benign}, {"b.com", Label::Benign}});
  EXPECT_EQ(q.toxicity, 0.0);
  EXPECT_EQ(q.expansion, 0);
}

TEST(Toxicity, DuplicatesCollapseToRootDomains) {
  std::vector<std::string> d;
  VerdictMap v;
  for (int i = 0; i < 30; ++i) d.push_back("r" + std::to_string(i % 10) + ".com");
  for (int i = 0; i < 10; ++i) v["r" + std::to_string(i) + ".com"] = i < 4 ? Label::Scam : Label::Benign;
  auto q = score_serp(serp_of(d), v);
  EXPECT_EQ(q.total_sites, 10);
  EXPECT_EQ(q.toxicity, 0.4);
}

TEST(Toxicity, EmptyAndUnknownThrow) {
  EXPECT_THROW(score_serp(serp_of({}), {}), Error);
  EXPECT_THROW(score_serp(serp_of({"a.com"}), {}), Error);
}

TEST(Toxicity, MatchesSetOracleOnRandomSerps) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    int pool = 1 + static_cast<int>(rng() % 40);
    VerdictMap v;
    for (int i = 0; i < pool; ++i) v["p" + std::to_string(i) + ".org"] = rng() % 3 == 0 ? Label::Scam : Label::Benign;
    std::vector<std::string> d;
    int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) d.push_back("p" + std::to_string(rng() % pool) + ".org");
    std::set<std::string> distinct(d.begin(), d.end()), scams;
    for (auto& x : distinct)
      if (v[x] == Label::Scam) scams.insert(x);
    auto q = score_serp(serp_of(d), v);
    EXPECT_EQ(q.total_sites, static_cast<int>(distinct.size()));
    EXPECT_EQ(q.expansion, static_cast<int>(scams.size()));
    EXPECT_EQ(q.toxicity, static_cast<double>(scams.size()) / static_cast<double>(distinct.size()));
  }
}

TEST(MaxReference, TopKAndSmallN) {
  std::vector<QueryToxicity> rows{{"a", "", 1, 1, 1.0, 1}, {"b", "", 2, 1, 0.5, 1}, {"c", "", 3, 0, 0.0, 0}};
  EXPECT_EQ(max_reference(rows, 2).mean_toxicity, 0.75);
  EXPECT_DOUBLE_EQ(max_reference(rows, 10).mean_toxicity, 0.5);
  EXPECT_DOUBLE_EQ(max_reference(rows, 10).mean_expansion, 2.0 / 3.0);
}

TEST(ToxicityCsv, RoundTrip) {
  std::vector<QueryToxicity> rows{{"cheap, shoes", "fashion", 10, 3, 0.3, 3}, {"x \"y\"", "", 4, 0, 0.0, 0}};
  EXPECT_EQ(toxicity_from_csv(toxicity_to_csv(rows)), rows);
}
