#pragma once

// Rule-based query sampling baselines: attribute- and segment-based
// selection, bootstrapped toxicity/expansion estimates and the
// cross-category generalisation matrix.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scamrank/corpus.hpp"
#include "scamrank/toxicity.hpp"

namespace scamrank {

enum class QueryAttribute { Informational, Commercial, LowCompetition, MediumCompetition, LongTail };
enum class Intent { Informational, Commercial };

std::string_view to_string(QueryAttribute a);
std::string_view to_string(Intent i);

// Pluggable query-intent source (rule lexicons, fixture annotations or an
// external model service).
class IntentAdapter {
 public:
  virtual ~IntentAdapter() = default;
  virtual std::set<Intent> classify(std::string_view query) const = 0;
};

// Whole-token lexicon matcher; phrases match as contiguous token runs.
class LexiconIntentClassifier : public IntentAdapter {
 public:
  LexiconIntentClassifier(std::vector<std::string> commercial, std::vector<std::string> informational);
  static const LexiconIntentClassifier& bundled();
  std::set<Intent> classify(std::string_view query) const override;

 private:
  std::vector<std::vector<std::string>> commercial_, informational_;
};

// Fixture annotations (intents.jsonl: {"query": ..., "intents": [...]})
// with a fallback adapter for unannotated queries.
class AnnotatedIntentClassifier : public IntentAdapter {
 public:
  AnnotatedIntentClassifier(std::map<std::string, std::set<Intent>> annotations, const IntentAdapter& fallback);
  static AnnotatedIntentClassifier from_file(const std::filesystem::path& path, const IntentAdapter& fallback);
  std::set<Intent> classify(std::string_view query) const override;

 private:
  std::map<std::string, std::set<Intent>> annotations_;
  const IntentAdapter* fallback_;
};

// Whitespace token count > 3.
bool is_long_tail(std::string_view query);

std::set<QueryAttribute> classify_attributes(const KeywordSuggestion& keyword, const IntentAdapter& intents);
std::set<QueryAttribute> classify_attributes(const KeywordSuggestion& keyword);

enum class TokenType { CoreProductType, Content, ProductName, Modifier, Price };
std::string_view to_string(TokenType t);
TokenType parse_token_type(std::string_view s);

struct QuerySegment {
  std::string text;
  TokenType token_type = TokenType::Modifier;
  bool operator==(const QuerySegment&) const = default;
};

// segments.jsonl record
struct SegmentRecord {
  QuerySegment segment;
  std::string category;
  int rank = 0;
};
std::vector<SegmentRecord> read_segments(const std::filesystem::path& path);

// True iff every word of the segment occurs as a whole token somewhere in
// the query (order-free, case-folded, no stemming).
bool match_segment(std::string_view query, const QuerySegment& segment);

struct BootstrapEstimate {
  double mean = 0.0;
  double std = 0.0;  // spread of the simulated means
  int n_sim = 0;
  int sample_size = 0;
  std::uint64_t seed = 0;
  bool operator==(const BootstrapEstimate&) const = default;
};

// Average of `n_sim` means of `sample_size` draws with replacement. The
// input is sorted first, so the estimate does not depend on score order.
BootstrapEstimate bootstrap_estimate(std::span<const double> scores, int n_sim = 1000, int sample_size = 20,
                                     std::uint64_t seed = 0);

// master seed mixed with a stable hash of the cell key
std::uint64_t cell_seed(std::uint64_t master, std::string_view key);

struct EstimateCell {
  std::size_t matches = 0;
  std::optional<BootstrapEstimate> toxicity;   // nullopt = ABSENT
  std::optional<BootstrapEstimate> expansion;
};

EstimateCell estimate_cell(std::span<const QueryToxicity* const> queries, std::uint64_t seed, int n_sim = 1000,
                           int sample_size = 20);

using ScoredByCategory = std::map<std::string, std::vector<QueryToxicity>>;
using SegmentsByCategory = std::map<std::string, std::vector<QuerySegment>>;

// Ranks a category's candidate segments by bootstrap mean toxicity of the
// category's matching queries (ties on text) and keeps the top m. Segments
// without matches are dropped.
std::vector<QuerySegment> top_segments(std::span<const QuerySegment> candidates,
                                       std::span<const QueryToxicity> queries, std::size_t m, std::uint64_t seed);

struct CrossCategoryMatrix {
  std::vector<std::string> categories;          // row/column order
  std::vector<std::vector<EstimateCell>> cells;  // [source][target]
};

// Cell (s, t): bootstrap over target-t queries matching any source-s segment.
CrossCategoryMatrix cross_category_matrix(const SegmentsByCategory& segments_by_cat, const ScoredByCategory& scored,
                                          std::uint64_t master_seed, int n_sim = 1000, int sample_size = 20);

struct BaselineRow {
  std::string name;
  std::map<std::string, EstimateCell> cells;  // per category
};

// Max row followed by one row per attribute.
std::vector<BaselineRow> attribute_table(std::span<const KeywordSuggestion> keywords, const ScoredByCategory& scored,
                                         const IntentAdapter& intents, std::uint64_t master_seed, std::size_t k = 20,
                                         int n_sim = 1000);

// One row per token type: queries matching any of the category's segments
// of that type.
std::vector<BaselineRow> segment_table(const SegmentsByCategory& segments_by_cat, const ScoredByCategory& scored,
                                       std::uint64_t master_seed, int n_sim = 1000);

std::string baseline_table_to_csv(std::span<const BaselineRow> rows);
std::string cross_matrix_to_csv(const CrossCategoryMatrix& m);

}  // namespace scamrank
