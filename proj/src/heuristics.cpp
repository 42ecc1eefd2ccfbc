#include "scamrank/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

namespace scamrank {

using nlohmann::json;

std::string_view to_string(QueryAttribute a) {
  switch (a) {
    case QueryAttribute::Informational: return "INFORMATIONAL";
    case QueryAttribute::Commercial: return "COMMERCIAL";
    case QueryAttribute::LowCompetition: return "LOW_COMPETITION";
    case QueryAttribute::MediumCompetition: return "MEDIUM_COMPETITION";
    case QueryAttribute::LongTail: return "LONG_TAIL";
  }
  return "?";
}

std::string_view to_string(Intent i) { return i == Intent::Commercial ? "commercial" : "informational"; }

std::string_view to_string(TokenType t) {
  switch (t) {
    case TokenType::CoreProductType: return "CORE_PRODUCT_TYPE";
    case TokenType::Content: return "CONTENT";
    case TokenType::ProductName: return "PRODUCT_NAME";
    case TokenType::Modifier: return "MODIFIER";
    case TokenType::Price: return "PRICE";
  }
  return "?";
}

TokenType parse_token_type(std::string_view s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "CORE_PRODUCT_TYPE") return TokenType::CoreProductType;
  if (u == "CONTENT") return TokenType::Content;
  if (u == "PRODUCT_NAME") return TokenType::ProductName;
  if (u == "MODIFIER") return TokenType::Modifier;
  if (u == "PRICE") return TokenType::Price;
  throw SchemaError("unsupported token type: " + std::string(s));
}

namespace {

std::vector<std::vector<std::string>> tokenize_lexicon(std::vector<std::string> entries) {
  std::vector<std::vector<std::string>> out;
  for (auto& e : entries) {
    auto toks = split_whitespace(to_lower(e));
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i)
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

Intent parse_intent(std::string_view s) {
  auto l = to_lower(s);
  if (l == "commercial") return Intent::Commercial;
  if (l == "informational") return Intent::Informational;
  throw SchemaError("unknown intent: " + std::string(s));
}

}  // namespace

LexiconIntentClassifier::LexiconIntentClassifier(std::vector<std::string> commercial,
                                                 std::vector<std::string> informational)
    : commercial_(tokenize_lexicon(std::move(commercial))), informational_(tokenize_lexicon(std::move(informational))) {}

const LexiconIntentClassifier& LexiconIntentClassifier::bundled() {
  static const LexiconIntentClassifier c(read_lines(data_dir() / "intent_commercial.txt"),
                                         read_lines(data_dir() / "intent_informational.txt"));
  return c;
}

std::set<Intent> LexiconIntentClassifier::classify(std::string_view query) const {
  auto tokens = split_whitespace(to_lower(query));
  std::set<Intent> out;
  for (auto& p : commercial_)
    if (contains_phrase(tokens, p)) {
      out.insert(Intent::Commercial);
      break;
    }
  for (auto& p : informational_)
    if (contains_phrase(tokens, p)) {
      out.insert(Intent::Informational);
      break;
    }
  return out;
}

AnnotatedIntentClassifier::AnnotatedIntentClassifier(std::map<std::string, std::set<Intent>> annotations,
                                                     const IntentAdapter& fallback)
    : annotations_(std::move(annotations)), fallback_(&fallback) {}

AnnotatedIntentClassifier AnnotatedIntentClassifier::from_file(const std::filesystem::path& path,
                                                               const IntentAdapter& fallback) {
  std::map<std::string, std::set<Intent>> ann;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      std::set<Intent> intents;
      for (auto& i : j.at("intents")) intents.insert(parse_intent(i.get<std::string>()));
      ann[to_lower(trim(j.at("query").get<std::string>()))] = std::move(intents);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad intents record: ") + e.what(), no);
    }
  }
  return AnnotatedIntentClassifier(std::move(ann), fallback);
}

std::set<Intent> AnnotatedIntentClassifier::classify(std::string_view query) const {
  if (auto it = annotations_.find(to_lower(trim(query))); it != annotations_.end()) return it->second;
  return fallback_->classify(query);
}

bool is_long_tail(std::string_view query) { return split_whitespace(query).size() > 3; }

std::set<QueryAttribute> classify_attributes(const KeywordSuggestion& keyword, const IntentAdapter& intents) {
  std::set<QueryAttribute> out;
  if (keyword.competition == Competition::Low) out.insert(QueryAttribute::LowCompetition);
  if (keyword.competition == Competition::Medium) out.insert(QueryAttribute::MediumCompetition);
  if (is_long_tail(keyword.text)) out.insert(QueryAttribute::LongTail);
  for (auto i : intents.classify(keyword.text))
    out.insert(i == Intent::Commercial ? QueryAttribute::Commercial : QueryAttribute::Informational);
  return out;
}

std::set<QueryAttribute> classify_attributes(const KeywordSuggestion& keyword) {
  return classify_attributes(keyword, LexiconIntentClassifier::bundled());
}

std::vector<SegmentRecord> read_segments(const std::filesystem::path& path) {
  std::vector<SegmentRecord> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      SegmentRecord r;
      r.segment.text = to_lower(trim(j.at("text").get<std::string>()));
      r.segment.token_type = parse_token_type(j.at("token_type").get<std::string>());
      r.category = j.at("category").get<std::string>();
      r.rank = j.value("rank", 0);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad segment record: ") + e.what(), no);
    }
  }
  return out;
}

bool match_segment(std::string_view query, const QuerySegment& segment) {
  auto words = split_whitespace(to_lower(segment.text));
  if (words.empty()) return false;
  auto tokens = split_whitespace(to_lower(query));
  std::set<std::string> have(tokens.begin(), tokens.end());
  return std::all_of(words.begin(), words.end(), [&](const std::string& w) { return have.contains(w); });
}

BootstrapEstimate bootstrap_estimate(std::span<const double> scores, int n_sim, int sample_size,
                                     std::uint64_t seed) {
  if (scores.empty()) throw Error("bootstrap over an empty score list");
  if (n_sim < 1 || sample_size < 1) throw Error("bootstrap needs n_sim >= 1 and sample_size >= 1");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(n_sim));
  for (auto& m : means) {
    double s = 0.0;
    for (int i = 0; i < sample_size; ++i) s += sorted[pick(rng)];
    m = s / sample_size;
  }
  BootstrapEstimate est{0.0, 0.0, n_sim, sample_size, seed};
  for (double m : means) est.mean += m;
  est.mean /= n_sim;
  double var = 0.0;
  for (double m : means) var += (m - est.mean) * (m - est.mean);
  est.std = std::sqrt(var / n_sim);
  // All draws are the same value: report it exactly.
  if (sorted.front() == sorted.back()) {
    est.mean = sorted.front();
    est.std = 0.0;
  }
  return est;
}

std::uint64_t cell_seed(std::uint64_t master, std::string_view key) { return fnv1a(key) ^ master; }

EstimateCell estimate_cell(std::span<const QueryToxicity* const> queries, std::uint64_t seed, int n_sim,
                           int sample_size) {
  EstimateCell cell;
  cell.matches = queries.size();
  if (queries.empty()) return cell;
  std::vector<double> tox, exp;
  for (auto* q : queries) {
    tox.push_back(q->toxicity);
    exp.push_back(q->expansion);
  }
  cell.toxicity = bootstrap_estimate(tox, n_sim, sample_size, seed);
  cell.expansion = bootstrap_estimate(exp, n_sim, sample_size, seed ^ 0x9e3779b97f4a7c15ULL);
  return cell;
}

namespace {

std::vector<const QueryToxicity*> matching(std::span<const QueryToxicity> queries,
                                           std::span<const QuerySegment> segments) {
  std::vector<const QueryToxicity*> out;
  for (auto& q : queries)
    if (std::any_of(segments.begin(), segments.end(), [&](const QuerySegment& s) { return match_segment(q.query, s); }))
      out.push_back(&q);
  return out;
}

}  // namespace

std::vector<QuerySegment> top_segments(std::span<const QuerySegment> candidates,
                                       std::span<const QueryToxicity> queries, std::size_t m, std::uint64_t seed) {
  std::vector<std::pair<double, QuerySegment>> scored;
  for (auto& seg : candidates) {
    auto hits = matching(queries, std::span(&seg, 1));
    if (hits.empty()) continue;
    auto cell = estimate_cell(hits, cell_seed(seed, "segment|" + seg.text), 1000, 20);
    scored.emplace_back(cell.toxicity->mean, seg);
  }
  std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
    return a.first != b.first ? a.first > b.first : a.second.text < b.second.text;
  });
  std::vector<QuerySegment> out;
  for (std::size_t i = 0; i < scored.size() && i < m; ++i) out.push_back(scored[i].second);
  return out;
}

CrossCategoryMatrix cross_category_matrix(const SegmentsByCategory& segments_by_cat, const ScoredByCategory& scored,
                                          std::uint64_t master_seed, int n_sim, int sample_size) {
  CrossCategoryMatrix m;
  for (auto& [cat, segs] : segments_by_cat) m.categories.push_back(cat);
  static const std::vector<QueryToxicity> none;
  for (auto& s : m.categories) {
    std::vector<EstimateCell> row;
    const auto& segs = segments_by_cat.at(s);
    for (auto& t : m.categories) {
      auto it = scored.find(t);
      const auto& target = it == scored.end() ? none : it->second;
      auto hits = matching(target, segs);
      row.push_back(estimate_cell(hits, cell_seed(master_seed, "cross|" + s + "|" + t), n_sim, sample_size));
    }
    m.cells.push_back(std::move(row));
  }
  return m;
}

std::vector<BaselineRow> attribute_table(std::span<const KeywordSuggestion> keywords, const ScoredByCategory& scored,
                                         const IntentAdapter& intents, std::uint64_t master_seed, std::size_t k,
                                         int n_sim) {
  std::map<std::string, std::set<QueryAttribute>> attrs;
  for (auto& kw : keywords) attrs[kw.text] = classify_attributes(kw, intents);

  std::vector<BaselineRow> rows;
  BaselineRow max_row{"Max", {}};
  for (auto& [cat, qs] : scored) {
    EstimateCell cell;
    cell.matches = qs.size();
    if (!qs.empty()) {
      auto ref = max_reference(qs, k);
      cell.toxicity = BootstrapEstimate{ref.mean_toxicity, 0.0, 0, static_cast<int>(std::min(k, qs.size())), 0};
      cell.expansion = BootstrapEstimate{ref.mean_expansion, 0.0, 0, static_cast<int>(std::min(k, qs.size())), 0};
    }
    max_row.cells[cat] = cell;
  }
  rows.push_back(std::move(max_row));

  for (auto attr : {QueryAttribute::Informational, QueryAttribute::Commercial, QueryAttribute::LowCompetition,
                    QueryAttribute::MediumCompetition, QueryAttribute::LongTail}) {
    BaselineRow row{std::string(to_string(attr)), {}};
    for (auto& [cat, qs] : scored) {
      std::vector<const QueryToxicity*> hits;
      for (auto& q : qs) {
        auto it = attrs.find(q.query);
        if (it != attrs.end() && it->second.contains(attr)) hits.push_back(&q);
      }
      row.cells[cat] = estimate_cell(hits, cell_seed(master_seed, "attr|" + cat + "|" + row.name), n_sim, 20);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BaselineRow> segment_table(const SegmentsByCategory& segments_by_cat, const ScoredByCategory& scored,
                                       std::uint64_t master_seed, int n_sim) {
  std::vector<BaselineRow> rows;
  for (auto type : {TokenType::CoreProductType, TokenType::Content, TokenType::ProductName, TokenType::Modifier,
                    TokenType::Price}) {
    BaselineRow row{std::string(to_string(type)), {}};
    for (auto& [cat, qs] : scored) {
      std::vector<QuerySegment> segs;
      if (auto it = segments_by_cat.find(cat); it != segments_by_cat.end())
        for (auto& s : it->second)
          if (s.token_type == type) segs.push_back(s);
      row.cells[cat] = estimate_cell(matching(qs, segs), cell_seed(master_seed, "seg|" + cat + "|" + row.name),
                                     n_sim, 20);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {
std::string cell_csv(const EstimateCell& c) {
  if (!c.toxicity) return std::to_string(c.matches) + ",,,,";
  return std::to_string(c.matches) + "," + format_double(c.toxicity->mean) + "," + format_double(c.toxicity->std) +
         "," + format_double(c.expansion->mean) + "," + format_double(c.expansion->std);
}
}  // namespace

std::string baseline_table_to_csv(std::span<const BaselineRow> rows) {
  std::string out = "row,category,matches,toxicity,toxicity_std,expansion,expansion_std\n";
  for (auto& r : rows)
    for (auto& [cat, cell] : r.cells) out += csv_escape(r.name) + "," + csv_escape(cat) + "," + cell_csv(cell) + "\n";
  return out;
}

std::string cross_matrix_to_csv(const CrossCategoryMatrix& m) {
  std::string out = "source,target,matches,toxicity,toxicity_std,expansion,expansion_std\n";
  for (std::size_t s = 0; s < m.categories.size(); ++s)
    for (std::size_t t = 0; t < m.categories.size(); ++t)
      out += csv_escape(m.categories[s]) + "," + csv_escape(m.categories[t]) + "," + cell_csv(m.cells[s][t]) + "\n";
  return out;
}

}  // namespace scamrank
