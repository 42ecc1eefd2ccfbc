#include <gtest/gtest.h>

#include "scamrank/branded.hpp"

using namespace scamrank;

TEST(Branded, KnownExamples) {
  const auto& lex = BrandLexicon::bundled();
  auto v = classify_branded("nike air max", lex);
  EXPECT_TRUE(v.branded);
  EXPECT_EQ(v.matched_brand, "nike");
  EXPECT_FALSE(classify_branded("trail running shoes", lex).branded);
}

TEST(Branded, AmbiguousBrandNeedsContext) {
  auto lex = BrandLexicon::make({"apple", "nike"}, {"apple"}, {"iphone", "macbook"});
  EXPECT_FALSE(classify_branded("apple pie recipe", lex).branded);
  EXPECT_TRUE(classify_branded("apple iphone case", lex).branded);
  EXPECT_TRUE(classify_branded("cheap macbook apple", lex).branded);
}

TEST(Branded, LongestPhraseWins) {
  auto lex = BrandLexicon::make({"north face", "face"}, {}, {});
  EXPECT_EQ(classify_branded("the north face jacket", lex).matched_brand, "north face");
}

TEST(Branded, WholeTokensOnly) {
  auto lex = BrandLexicon::make({"gap"}, {}, {});
  EXPECT_FALSE(classify_branded("mind the gaps", lex).branded);
  EXPECT_TRUE(classify_branded("gap, jeans", lex).branded);
}

TEST(Branded, AmbiguousMustBeBrand) {
  EXPECT_THROW(BrandLexicon::make({"nike"}, {"apple"}, {}), Error);
  EXPECT_THROW(classify_branded("", BrandLexicon::bundled()), Error);
}

TEST(BrandedEval, PerfectLexiconOnItsOwnFixture) {
  auto lex = BrandLexicon::make({"nike", "adidas"}, {}, {});
  std::vector<std::pair<std::string, bool>> data{{"nike shoes", true}, {"adidas ultra", true}, {"red shoes", false}};
  EXPECT_EQ(evaluate_filter(data, lex).f1, 1.0);
}

TEST(BrandedEval, EmptyLexiconHasZeroRecall) {
  auto lex = BrandLexicon::make({}, {}, {});
  std::vector<std::pair<std::string, bool>> data{{"nike shoes", true}, {"red shoes", false}};
  auto m = evaluate_filter(data, lex);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.tp, 0);
}

TEST(BrandedEval, SingleLabelInputRejected) {
  std::vector<std::pair<std::string, bool>> data{{"nike shoes", true}};
  EXPECT_THROW(evaluate_filter(data, BrandLexicon::bundled()), Error);
}

TEST(BrandedEval, BundledFixture) {
  auto data = read_brand_fixture(data_dir() / "fixtures" / "branded_labeled.tsv");
  ASSERT_EQ(data.size(), 200u);
  int branded = 0;
  for (auto& [k, b] : data) branded += b;
  EXPECT_EQ(branded, 100);
  EXPECT_GE(evaluate_filter(data, BrandLexicon::bundled()).f1, 0.85);
}
