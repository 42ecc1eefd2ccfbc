#include <gtest/gtest.h>

#include <map>
#include <random>

#include "lupi_testing.hpp"
#include "scamrank/synth.hpp"

using namespace scamrank;

namespace {

LupiTrainConfig quick_train(std::uint64_t seed = 3) {
  LupiTrainConfig c;
  c.lr = 3e-3;
  c.epochs = 3;
  c.batch_size = 16;
  c.seed = seed;
  return c;
}

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.layers = 1;
  e.dim = 16;
  e.heads = 2;
  e.ff_dim = 32;
  return e;
}

const SyntheticLupiCorpus& small_corpus() {
  static const SyntheticLupiCorpus c = make_lupi_corpus({5, 40, 10, 0.5, 21});
  return c;
}

}  // namespace

TEST(Tokenizer, DeterministicAndTruncated) {
  TokenizerConfig cfg;
  const auto& tok = bundled_tokenizer(cfg);
  EXPECT_EQ(tok.encode_query("cheap nike shoes"), tok.encode_query("cheap nike shoes"));
  auto ids = tok.encode_query("cheap nike shoes");
  EXPECT_EQ(ids.size(), static_cast<std::size_t>(cfg.max_len));
  EXPECT_EQ(ids[0], kClsId);
  EXPECT_EQ(ids[4], kPadId);
  std::string longer;
  for (int i = 0; i < 100; ++i) longer += "word" + std::to_string(i) + " ";
  EXPECT_EQ(tok.encode_query(longer).size(), static_cast<std::size_t>(cfg.max_len));
  for (int id : tok.encode_serp(longer)) EXPECT_LT(id, cfg.vocab_size);
}

TEST(Tokenizer, CollisionRateOnTenThousandWords) {
  TokenizerConfig cfg;
  const auto& tok = bundled_tokenizer(cfg);
  auto ranked = read_lines(data_dir() / "wordfreq.txt");
  std::vector<std::string> words;
  std::set<std::string> seen;
  for (auto& w : ranked) {
    if (words.size() == 10000) break;
    auto parts = Tokenizer::words(w);
    if (parts.size() == 1 && parts[0] == w && seen.insert(w).second) words.push_back(w);
  }
  ASSERT_EQ(words.size(), 10000u);
  // A collision is a word landing on an id some earlier word already took.
  std::set<int> ids;
  for (auto& w : words) ids.insert(tok.word_id(w));
  double rate = static_cast<double>(words.size() - ids.size()) / 10000.0;
  RecordProperty("collision_rate", std::to_string(rate));
  std::cout << "collision rate over 10k words: " << rate << "\n";
  EXPECT_LT(rate, 0.30);
}

TEST(Privileged, DefaultsAndParsing) {
  PrivilegedConfig d;
  EXPECT_EQ(to_string(d), "google:description:scam_only:ranked:20");
  EXPECT_EQ(parse_privileged("google:description:scam_only:ranked:20"), d);
  EXPECT_THROW(parse_privileged("google:description:scam_only:ranked:60"), Error);
  EXPECT_THROW(parse_privileged("altavista:description:all:ranked:10"), Error);
}

TEST(Privileged, ScamOnlyKeepsRankOrder) {
  SerpResultSet s;
  s.query = "q";
  for (int r = 1; r <= 4; ++r)
    s.entries.push_back({Engine::Google, r, "https://d" + std::to_string(r) + ".com", "d" + std::to_string(r) + ".com",
                         "t" + std::to_string(r), "desc" + std::to_string(r)});
  VerdictMap v{{"d1.com", Label::Benign}, {"d2.com", Label::Scam}, {"d4.com", Label::Scam}};
  auto t = privileged_texts(s, parse_privileged("google:description:scam_only:ranked:5"), v);
  EXPECT_EQ(t, (std::vector<std::string>{"desc2", "desc4"}));
  EXPECT_EQ(privileged_texts(s, parse_privileged("google:title:all:ranked:5"), v).size(), 4u);
}

TEST(Teacher, PermutationInvariantAndRowStochastic) {
  auto s = fixtures::make_tiny_setup(77);
  std::mt19937_64 rng(1);
  std::vector<std::vector<int>> serp;
  for (int i = 0; i < 4; ++i) serp.push_back(fixtures::random_ids(rng, 32, 6));
  auto a = teacher_forward(s.teacher, s.queries[0], serp);
  std::reverse(serp.begin(), serp.end());
  auto b = teacher_forward(s.teacher, s.queries[0], serp);
  EXPECT_LE(std::abs(a.score - b.score), 1e-6);
  for (auto& layer : a.query_attention)
    for (auto& head : layer)
      for (Eigen::Index r = 0; r < head.rows(); ++r) EXPECT_NEAR(head.row(r).sum(), 1.0, 1e-5);
}

TEST(Teacher, EmptySerpSetIsFinite) {
  auto s = fixtures::make_tiny_setup(78);
  auto out = teacher_forward(s.teacher, s.queries[0], {});
  EXPECT_TRUE(out.empty_privileged);
  EXPECT_TRUE(std::isfinite(out.score));
}

TEST(Student, InitFromTeacherCopiesBackbone) {
  auto t = TeacherModel::init({}, small_encoder(), {}, 5);
  auto st = StudentModel::from_teacher(t, 5);
  const auto& tok = bundled_tokenizer(t.tokenizer);
  auto ids = tok.encode_query("replica handbag cheap");
  EncoderCache ca, cb;
  auto a = t.query_encoder.forward(ids, ca, {});
  auto b = st.query_encoder.forward(ids, cb, {});
  EXPECT_EQ(a.row(0), b.row(0));
  auto tp = t.query_encoder.params(), sp = st.query_encoder.params();
  for (std::size_t i = 0; i < tp.size(); ++i) EXPECT_EQ(tp[i]->value, sp[i]->value);
}

TEST(Student, EvalRepeatableAndFinite) {
  auto st = StudentModel::init({}, small_encoder(), 9);
  const auto& tok = bundled_tokenizer(st.tokenizer);
  auto ids = tok.encode_query("free bitcoin generator");
  auto a = student_forward(st, ids), b = student_forward(st, ids);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(a.hint, b.hint);
  EXPECT_TRUE(std::isfinite(a.score));
  EXPECT_TRUE(a.hint.allFinite());
}

TEST(Loss, GroundTruthOnlyIsMae) {
  auto s = fixtures::make_tiny_setup(31);
  double mae = 0.0;
  for (std::size_t i = 0; i < s.queries.size(); ++i)
    mae += std::abs(student_forward(s.student, s.queries[i]).score - s.targets[i].label);
  mae /= static_cast<double>(s.queries.size());
  auto batch = s.batch();
  EXPECT_DOUBLE_EQ(total_loss(s.student, batch, {1, 0, 0, 0}, {}, false).total, mae);
}

TEST(Loss, MatchedTeacherGivesZeroDistillationTerms) {
  auto s = fixtures::make_tiny_setup(32);
  for (std::size_t i = 0; i < s.queries.size(); ++i) {
    auto out = student_forward(s.student, s.queries[i]);
    s.targets[i] = {out.score, out.score, out.hint, out.attention};
  }
  auto batch = s.batch();
  auto t = total_loss(s.student, batch, {1, 1, 1, 1}, {}, false);
  EXPECT_EQ(t.gt, 0.0);
  EXPECT_EQ(t.pm, 0.0);
  EXPECT_EQ(t.hm, 0.0);
  EXPECT_EQ(t.am, 0.0);
}

TEST(Loss, WeightsValidated) {
  EXPECT_THROW(parse_weights("0,0,0,0"), Error);
  EXPECT_THROW(parse_weights("1,-1,0,0"), Error);
  EXPECT_EQ(parse_weights("1,0.5,0.5,0.5"), LossWeights{});
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed : {501u, 502u, 503u}) {
    for (auto w : {LossWeights{1, 0, 0, 0}, LossWeights{0, 1, 0, 0}, LossWeights{0, 0, 1, 0}, LossWeights{0, 0, 0, 1},
                   LossWeights{}}) {
      auto s = fixtures::make_tiny_setup(seed);
      if (fixtures::kink_margin(s, w) < 1e-2) continue;
      auto r = fixtures::check_gradients(s, w);
      EXPECT_LE(r.tensor_rel_error, 1e-4) << "seed " << seed << " " << r.worst_tensor;
    }
  }
}

TEST(Training, DefaultsEchoed) {
  LupiTrainConfig c;
  auto j = train_config_to_json(c);
  EXPECT_EQ(j["lr"], 2e-5);
  EXPECT_EQ(j["epochs"], 5);
  EXPECT_EQ(j["patience"], 2);
}

TEST(Training, TeacherLossDecreases) {
  auto corpus = make_lupi_corpus({5, 40, 10, 0.5, 4});
  std::vector<LupiExample> data(corpus.examples.begin(), corpus.examples.begin() + 200);
  auto cfg = quick_train();
  cfg.epochs = 5;
  cfg.patience = 5;
  auto init = TeacherModel::init({}, small_encoder(), {}, 1);
  double before = mae_teacher(init, data, corpus.verdicts);
  auto trained = train_teacher(init, data, data, corpus.verdicts, cfg);
  EXPECT_LT(mae_teacher(trained, data, corpus.verdicts), before);
}

TEST(Training, EarlyStoppingHalts) {
  const auto& c = small_corpus();
  auto cfg = quick_train();
  cfg.lr = 0.0;
  cfg.epochs = 10;
  cfg.patience = 2;
  TrainTrace trace;
  auto split = split_validation(c.examples, 0.2, 1);
  train_baseline(StudentModel::init({}, small_encoder(), 1), split.train, split.validation, cfg, &trace);
  EXPECT_TRUE(trace.stopped_early);
  EXPECT_EQ(trace.epoch_val_loss.size(), 3u);
  EXPECT_EQ(trace.best_epoch, 0);
}

TEST(Distillation, TeacherFrozenAndBaselineTrajectoryMatches) {
  const auto& c = small_corpus();
  auto split = split_validation(c.examples, 0.2, 2);
  auto cfg = quick_train();
  cfg.epochs = 1;
  auto teacher = TeacherModel::init({}, small_encoder(), {}, 3);
  const double before = checksum(teacher.params());
  TrainTrace distilled, baseline;
  distill_student(teacher, {1, 0, 0, 0}, split.train, split.validation, c.verdicts, cfg, &distilled);
  EXPECT_EQ(checksum(teacher.params()), before);
  train_baseline(StudentModel::from_teacher(teacher, cfg.seed), split.train, split.validation, cfg, &baseline);
  EXPECT_EQ(distilled.step_loss, baseline.step_loss);
  EXPECT_EQ(distilled.step_checksum, baseline.step_checksum);
}

TEST(Distillation, CheckpointRoundTrip) {
  auto t = TeacherModel::init({}, small_encoder(), {}, 4);
  auto st = StudentModel::from_teacher(t, 4);
  auto t2 = teacher_from_json(teacher_to_json(t));
  auto s2 = student_from_json(student_to_json(st));
  EXPECT_EQ(checksum(t2.params()), checksum(t.params()));
  EXPECT_EQ(predict_student(s2, "cheap replica watch"), predict_student(st, "cheap replica watch"));
}

TEST(Grid, SingleCombinationAndDeterminism) {
  const auto& c = small_corpus();
  std::vector<LupiExample> data(c.examples.begin(), c.examples.begin() + 60);
  auto cfg = quick_train();
  cfg.epochs = 1;
  PrivilegedAxes axes;
  auto a = grid_search_privileged(data, axes, {}, small_encoder(), cfg, c.verdicts);
  EXPECT_EQ(a.best, PrivilegedConfig{});
  ASSERT_EQ(a.table.size(), 1u);
  auto b = grid_search_privileged(data, axes, {}, small_encoder(), cfg, c.verdicts);
  EXPECT_EQ(a.table[0].validation_mae, b.table[0].validation_mae);
}

TEST(Grid, DescriptionsWinWhenSignalLivesThere) {
  auto corpus = make_lupi_corpus({5, 60, 10, 0.5, 13});
  PrivilegedAxes axes;
  axes.fields = {PrivField::Title, PrivField::Description};
  axes.filters = {PrivFilter::All};
  axes.sizes = {10};
  auto cfg = quick_train();
  cfg.epochs = 6;
  cfg.patience = 6;
  auto r = grid_search_privileged(corpus.examples, axes, {}, small_encoder(), cfg, corpus.verdicts, 0.2);
  ASSERT_EQ(r.table.size(), 2u);
  EXPECT_EQ(r.best.field, PrivField::Description);
}

TEST(Loco, FoldsPartitionByCategory) {
  const auto& c = small_corpus();
  auto folds = loco_partition(c.examples, c.categories);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<int> covered(c.examples.size(), 0);
  for (auto& f : folds) {
    EXPECT_EQ(f.test.size() + f.rest.size(), c.examples.size());
    for (auto i : f.test) {
      EXPECT_EQ(c.examples[i].category, f.category);
      ++covered[i];
    }
    for (auto i : f.rest) EXPECT_NE(c.examples[i].category, f.category);
  }
  for (int n : covered) EXPECT_EQ(n, 1);
}

TEST(Loco, SmallFoldsSkipped) {
  const auto& c = small_corpus();
  LocoConfig cfg;
  cfg.min_queries = 1000;
  auto folds = loco_cv(c.examples, c.categories, cfg, c.verdicts);
  ASSERT_EQ(folds.size(), 5u);
  for (auto& f : folds) EXPECT_TRUE(f.skipped);
}

TEST(Rank, MonotoneWithLexicographicTies) {
  auto st = StudentModel::init({}, small_encoder(), 2);
  std::vector<KeywordSuggestion> kws;
  for (auto q : {"cheap shoes", "shoes", "replica bag", "bag", "cheap shoes"})
    kws.push_back({q, "x.com", "fashion", Competition::Low, 10});
  kws.push_back({"bitcoin", "x.com", "crypto", Competition::Low, 10});
  auto r = rank_keywords(st, kws, 3);
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i].category == r[i - 1].category) {
      EXPECT_GE(r[i - 1].score, r[i].score);
      if (r[i - 1].score == r[i].score) EXPECT_LT(r[i - 1].query, r[i].query);
    }
  EXPECT_EQ(ranked_from_csv(ranked_to_csv(r)), r);
}

TEST(Rank, FortyNineCategoriesGive980Queries) {
  auto st = StudentModel::init({}, small_encoder(), 2);
  std::vector<KeywordSuggestion> kws;
  for (int c = 0; c < 49; ++c)
    for (int q = 0; q < 25; ++q)
      kws.push_back({"item" + std::to_string(q) + " kind" + std::to_string(c), "x.com", "cat" + std::to_string(c),
                     Competition::Low, 10});
  EXPECT_EQ(rank_keywords(st, kws, 20).size(), 980u);
}
