#pragma once

// Privileged-information ranking model: a SERP-aware teacher (query encoder +
// SERP encoder + fusion regressor) and a query-only student distilled from
// it with a four-term loss (ground truth, teacher prediction, hint and
// attention matching).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "scamrank/corpus.hpp"
#include "scamrank/encoder.hpp"
#include "scamrank/toxicity.hpp"

namespace scamrank {

// ---------------------------------------------------------------- tokenizer

struct TokenizerConfig {
  int vocab_size = 8192;
  int max_len = 32;       // query sequences
  int serp_max_len = 64;  // SERP entry sequences
  // Share of ids given directly to the most frequent words of the bundled
  // frequency table; all other words are hashed into the remaining buckets.
  double head_fraction = 0.5;

  void validate() const;
  bool operator==(const TokenizerConfig&) const = default;
};

constexpr int kPadId = 0;
constexpr int kClsId = 1;

class Tokenizer {
 public:
  Tokenizer(TokenizerConfig cfg, std::span<const std::string> ranked_words);
  // Uses data/wordfreq.txt for the head vocabulary.
  static Tokenizer bundled(const TokenizerConfig& cfg);

  // CLS + word ids, truncated to max_len and right-padded with PAD.
  std::vector<int> encode(std::string_view text, int max_len) const;
  std::vector<int> encode_query(std::string_view text) const { return encode(text, cfg_.max_len); }
  std::vector<int> encode_serp(std::string_view text) const { return encode(text, cfg_.serp_max_len); }
  int word_id(std::string_view word) const;
  // Lowercased alphanumeric runs.
  static std::vector<std::string> words(std::string_view text);

  const TokenizerConfig& config() const { return cfg_; }
  int head_size() const { return static_cast<int>(head_.size()); }
  // Digest of the head vocabulary, stored in checkpoints.
  std::string head_digest() const { return digest_; }

 private:
  TokenizerConfig cfg_;
  std::unordered_map<std::string, int> head_;
  std::string digest_;
};

// Process-wide cache of Tokenizer::bundled(cfg).
const Tokenizer& bundled_tokenizer(const TokenizerConfig& cfg);

// ------------------------------------------------------- privileged inputs

enum class PrivEngine { Google, Bing, Baidu, All };
enum class PrivField { Title, Description, Both };
enum class PrivFilter { All, ScamOnly };
enum class PrivSelection { Ranked, Random };

struct PrivilegedConfig {
  PrivEngine engine = PrivEngine::Google;
  PrivField field = PrivField::Description;
  PrivFilter filter = PrivFilter::ScamOnly;
  PrivSelection selection = PrivSelection::Ranked;
  int size = 20;

  void validate() const;
  bool operator==(const PrivilegedConfig&) const = default;
};

// "google:description:scam_only:ranked:20"
PrivilegedConfig parse_privileged(std::string_view spec);
std::string to_string(const PrivilegedConfig& p);

// Texts of the selected SERP entries, in selection order. SCAM_ONLY keeps
// entries whose root domain has a SCAM verdict; entries without a verdict
// are dropped. RANDOM selection is seeded by (seed, query). Fewer than
// `size` matching entries is not an error.
std::vector<std::string> privileged_texts(const SerpResultSet& serp, const PrivilegedConfig& priv,
                                          const VerdictMap& verdicts, std::uint64_t seed = 0);

// ------------------------------------------------------------------ dataset

struct LupiExample {
  std::string query;
  std::string category;
  SerpResultSet serp;
  double toxicity = 0.0;
  int expansion = 0;
  bool operator==(const LupiExample&) const = default;
};

nlohmann::json lupi_example_to_json(const LupiExample& e);
LupiExample lupi_example_from_json(const nlohmann::json& j);
std::vector<LupiExample> read_lupi_examples(const std::filesystem::path& path);
void write_lupi_examples(const std::filesystem::path& path, std::span<const LupiExample> examples);

// -------------------------------------------------------------------- models

struct TeacherModel {
  TokenizerConfig tokenizer;
  EncoderConfig encoder;  // query encoder; the SERP encoder uses serp_max_len
  PrivilegedConfig priv;
  Encoder query_encoder;
  Encoder serp_encoder;
  Param fuse_w, fuse_b;  // 2*dim -> dim
  Param head_w, head_b;  // dim -> 1

  // Query and SERP encoders are initialized independently.
  static TeacherModel init(const TokenizerConfig& tok, const EncoderConfig& enc, const PrivilegedConfig& priv,
                           std::uint64_t seed);
  ParamList params();
};

struct TeacherOutput {
  double score = 0.0;
  Mat fused;  // 1 x dim
  AttentionMaps query_attention;
  bool empty_privileged = false;
};

struct TeacherPass {
  EncoderCache query;
  std::vector<EncoderCache> serp;
  Mat concat, pre, relu_mask, drop;
  TeacherOutput out;
};

TeacherOutput teacher_forward(const TeacherModel& m, const std::vector<int>& query_ids,
                              const std::vector<std::vector<int>>& serp_ids, TrainContext ctx = {},
                              TeacherPass* pass = nullptr);
// Backpropagates d(loss)/d(score) through a recorded pass.
void teacher_backward(TeacherModel& m, const TeacherPass& pass, double dscore);

struct StudentModel {
  TokenizerConfig tokenizer;
  EncoderConfig encoder;
  Encoder query_encoder;
  Param pred_w1, pred_b1;  // dim -> ff_dim
  Param pred_w2, pred_b2;  // ff_dim -> 1
  Param dist_w, dist_b;    // dim -> dim

  static StudentModel init(const TokenizerConfig& tok, const EncoderConfig& enc, std::uint64_t seed);
  // Backbone copied from the teacher's query encoder; heads freshly drawn.
  static StudentModel from_teacher(const TeacherModel& teacher, std::uint64_t seed);
  ParamList params();
  ParamList head_params();
};

struct StudentOutput {
  double score = 0.0;
  Mat hint;  // 1 x dim
  AttentionMaps attention;
};

struct StudentPass {
  EncoderCache enc;
  Mat cls, drop, pre, hidden;
  StudentOutput out;
};

StudentOutput student_forward(const StudentModel& m, const std::vector<int>& query_ids, TrainContext ctx = {},
                              StudentPass* pass = nullptr);

// ------------------------------------------------------------------- losses

struct LossWeights {
  double gt = 1.0;
  double pm = 0.5;
  double hm = 0.5;
  double am = 0.5;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

LossWeights parse_weights(std::string_view csv);

// Teacher-side quantities the student is matched against (teacher in eval
// mode); `label` is the ground-truth toxicity.
struct DistillTarget {
  double label = 0.0;
  double teacher_score = 0.0;
  Mat fused;
  AttentionMaps attention;
};

struct LossTerms {
  double gt = 0.0, pm = 0.0, hm = 0.0, am = 0.0, total = 0.0;
};

struct StudentSample {
  const std::vector<int>* query_ids;
  const DistillTarget* target;
};

// Batch-mean loss
//   gt*MAE(s, y) + pm*MAE(s, t) + hm*MSE(hint, fused) + am*mean_layers MSE(attn_s, attn_t)
// Gradients (student only) are accumulated into the student's params when
// `accumulate` is set; the caller zeroes them. Terms with zero weight are
// neither computed nor required in the targets.
LossTerms total_loss(StudentModel& student, std::span<const StudentSample> batch, const LossWeights& w,
                     TrainContext ctx = {}, bool accumulate = true);

// -------------------------------------------------------------- checkpoints

nlohmann::json teacher_to_json(const TeacherModel& m);
TeacherModel teacher_from_json(const nlohmann::json& j);
nlohmann::json student_to_json(const StudentModel& m);
StudentModel student_from_json(const nlohmann::json& j);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

// ------------------------------------------------------------------ training

struct LupiTrainConfig {
  double lr = 2e-5;
  int epochs = 5;
  int batch_size = 32;
  double warmup_fraction = 0.1;
  int patience = 2;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;

  void validate() const;
};

nlohmann::json train_config_to_json(const LupiTrainConfig& c);

struct TrainTrace {
  std::vector<double> step_loss;       // training batch loss per optimizer step
  std::vector<double> step_checksum;   // parameter checksum after each step
  std::vector<double> epoch_val_loss;
  int best_epoch = -1;
  bool stopped_early = false;
};

struct DatasetSplit {
  std::vector<LupiExample> train;
  std::vector<LupiExample> validation;
};

// Seeded shuffle; the first ceil(fraction * n) examples go to validation.
DatasetSplit split_validation(std::span<const LupiExample> data, double fraction, std::uint64_t seed);

// Trains with L1 loss on toxicity; returns the lowest-validation-MAE
// checkpoint (early stopping with patience).
TeacherModel train_teacher(TeacherModel init, std::span<const LupiExample> train,
                           std::span<const LupiExample> validation, const VerdictMap& verdicts,
                           const LupiTrainConfig& cfg, TrainTrace* trace = nullptr);

// Shared student trainer. With teacher == nullptr only the ground-truth term
// may be weighted. Returns the best-validation-loss checkpoint.
StudentModel fit_student(StudentModel init, const TeacherModel* teacher, const LossWeights& w,
                         std::span<const LupiExample> train, std::span<const LupiExample> validation,
                         const VerdictMap& verdicts, const LupiTrainConfig& cfg, TrainTrace* trace = nullptr);

// Student initialized from the (frozen) teacher, trained with all four terms.
StudentModel distill_student(const TeacherModel& teacher, const LossWeights& w, std::span<const LupiExample> train,
                             std::span<const LupiExample> validation, const VerdictMap& verdicts,
                             const LupiTrainConfig& cfg, TrainTrace* trace = nullptr);

// Query-only baseline: ground-truth term only.
StudentModel train_baseline(StudentModel init, std::span<const LupiExample> train,
                            std::span<const LupiExample> validation, const LupiTrainConfig& cfg,
                            TrainTrace* trace = nullptr);

// Random search over loss weights scored by student validation MAE against
// ground truth. Trial 0 is always the default weights.
LossWeights tune_loss_weights(const TeacherModel& teacher, std::span<const LupiExample> train,
                              std::span<const LupiExample> validation, const VerdictMap& verdicts,
                              const LupiTrainConfig& cfg, int trials, std::uint64_t seed);

// --------------------------------------------------------------- evaluation

double predict_teacher(const TeacherModel& m, const LupiExample& e, const VerdictMap& verdicts);
double predict_student(const StudentModel& m, std::string_view query);
double mae_teacher(const TeacherModel& m, std::span<const LupiExample> data, const VerdictMap& verdicts);
double mae_student(const StudentModel& m, std::span<const LupiExample> data);

// Mean ground-truth toxicity and expansion of the top-k examples by score
// (score descending, ties on query text).
struct TopK {
  double toxicity = 0.0;
  double expansion = 0.0;
};
TopK top_k_by_score(std::span<const LupiExample> data, std::span<const double> scores, std::size_t k);

struct PrivilegedAxes {
  std::vector<PrivEngine> engines{PrivEngine::Google};
  std::vector<PrivField> fields{PrivField::Description};
  std::vector<PrivFilter> filters{PrivFilter::ScamOnly};
  std::vector<PrivSelection> selections{PrivSelection::Ranked};
  std::vector<int> sizes{20};
};

struct GridRow {
  PrivilegedConfig priv;
  double validation_mae = 0.0;
};

struct GridResult {
  PrivilegedConfig best;
  std::vector<GridRow> table;  // sorted by validation MAE, ties in grid order
};

// One teacher per combination on a fixed train/validation split.
GridResult grid_search_privileged(std::span<const LupiExample> data, const PrivilegedAxes& axes,
                                  const TokenizerConfig& tok, const EncoderConfig& enc, const LupiTrainConfig& cfg,
                                  const VerdictMap& verdicts, double validation_fraction = 0.1);

struct LocoConfig {
  TokenizerConfig tokenizer;
  EncoderConfig encoder;
  PrivilegedConfig priv;
  LupiTrainConfig teacher_train;
  LupiTrainConfig student_train;
  LossWeights weights;
  std::size_t top_k = 20;
  std::size_t min_queries = 25;
  double validation_fraction = 0.1;
  // Draw validation from the held-out category (and score on the rest of it)
  // instead of from the training categories.
  bool validation_from_test = false;
  std::uint64_t seed = 0;
};

struct FoldReport {
  std::string category;
  bool skipped = false;
  std::string note;
  std::size_t n_train = 0, n_validation = 0, n_test = 0;
  std::size_t empty_privileged = 0;  // test queries whose privileged set was empty
  TopK max, baseline, teacher, student;
};

// Held-out category and the example indices on each side of a fold.
struct LocoFold {
  std::string category;
  std::vector<std::size_t> test, rest;
};
std::vector<LocoFold> loco_partition(std::span<const LupiExample> data, std::span<const std::string> categories);

using FoldCallback = std::function<void(const FoldReport&)>;

std::vector<FoldReport> loco_cv(std::span<const LupiExample> data, std::span<const std::string> categories,
                                const LocoConfig& cfg, const VerdictMap& verdicts, const FoldCallback& on_fold = {});

nlohmann::json fold_reports_to_json(std::span<const FoldReport> folds);

struct RankedKeyword {
  std::string category;
  std::string query;
  double score = 0.0;
  bool operator==(const RankedKeyword&) const = default;
};

// Scores clamped to [0,1]; per category, descending score with
// lexicographic ties; top k per category. Duplicate keywords in a category
// are ranked once.
std::vector<RankedKeyword> rank_keywords(const StudentModel& student, std::span<const KeywordSuggestion> keywords,
                                         std::size_t k);

// category,rank,query,score
std::string ranked_to_csv(std::span<const RankedKeyword> ranked);
std::vector<RankedKeyword> ranked_from_csv(std::string_view csv);

}  // namespace scamrank
