#include "scamrank/branded.hpp"

#include <algorithm>
#include <sstream>

namespace scamrank {

namespace {

std::string normalize_phrase(std::string_view s) {
  auto toks = split_whitespace(to_lower(s));
  std::string out;
  for (auto& t : toks) out += (out.empty() ? "" : " ") + t;
  return out;
}

std::set<std::string> normalize_all(const std::vector<std::string>& v) {
  std::set<std::string> out;
  for (auto& s : v)
    if (auto n = normalize_phrase(s); !n.empty()) out.insert(n);
  return out;
}

// Strips punctuation at token edges so "nike," and "(nike)" still match.
std::string strip_token(const std::string& t) {
  std::size_t b = 0, e = t.size();
  auto keep = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '&' || c == '+'; };
  while (b < e && !keep(t[b])) ++b;
  while (e > b && !keep(t[e - 1])) --e;
  return t.substr(b, e - b);
}

}  // namespace

BrandLexicon BrandLexicon::make(std::vector<std::string> brands, std::vector<std::string> ambiguous,
                                std::vector<std::string> context) {
  BrandLexicon lex{normalize_all(brands), normalize_all(ambiguous), normalize_all(context)};
  for (auto& a : lex.ambiguous)
    if (!lex.brands.contains(a)) throw SchemaError("ambiguous entry is not a brand: " + a);
  return lex;
}

BrandLexicon BrandLexicon::from_files(const std::filesystem::path& brands, const std::filesystem::path& ambiguous,
                                      const std::filesystem::path& context) {
  return make(read_lines(brands), read_lines(ambiguous), read_lines(context));
}

const BrandLexicon& BrandLexicon::bundled() {
  static const BrandLexicon lex =
      from_files(data_dir() / "brands.txt", data_dir() / "ambiguous.txt", data_dir() / "brand_context.txt");
  return lex;
}

BrandVerdict classify_branded(std::string_view keyword, const BrandLexicon& lexicon) {
  if (trim(keyword).empty()) throw Error("empty keyword");
  std::vector<std::string> tokens;
  for (auto& t : split_whitespace(to_lower(keyword)))
    if (auto s = strip_token(t); !s.empty()) tokens.push_back(s);

  const std::size_t n = tokens.size();
  // Longest phrase first at each position, earliest position wins.
  for (std::size_t i = 0; i < n; ++i) {
    std::string phrase;
    std::vector<std::string> candidates;
    for (std::size_t j = i; j < n; ++j) {
      phrase += (j == i ? "" : " ") + tokens[j];
      candidates.push_back(phrase);
    }
    for (std::size_t len = candidates.size(); len-- > 0;) {
      const auto& p = candidates[len];
      if (!lexicon.brands.contains(p)) continue;
      if (lexicon.ambiguous.contains(p)) {
        bool before = i > 0 && lexicon.context.contains(tokens[i - 1]);
        bool after = i + len + 1 < n && lexicon.context.contains(tokens[i + len + 1]);
        if (!before && !after) continue;
      }
      return {true, p};
    }
  }
  return {};
}

BrandMetrics evaluate_filter(std::span<const std::pair<std::string, bool>> labeled, const BrandClassifier& classifier) {
  bool any_pos = false, any_neg = false;
  for (auto& [kw, y] : labeled) (y ? any_pos : any_neg) = true;
  if (!any_pos || !any_neg) throw Error("evaluation needs both branded and unbranded examples");
  BrandMetrics m;
  for (auto& [kw, y] : labeled) {
    bool p = classifier.classify(kw).branded;
    if (p && y) ++m.tp;
    else if (p) ++m.fp;
    else if (y) ++m.fn;
    else ++m.tn;
  }
  m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

BrandMetrics evaluate_filter(std::span<const std::pair<std::string, bool>> labeled, const BrandLexicon& lexicon) {
  return evaluate_filter(labeled, LexiconBrandClassifier(lexicon));
}

std::vector<std::pair<std::string, bool>> read_brand_fixture(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, bool>> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw ParseError("expected keyword<TAB>label", no);
    auto l = to_lower(trim(f[1]));
    if (l != "branded" && l != "unbranded") throw ParseError("label must be branded or unbranded", no);
    out.emplace_back(trim(f[0]), l == "branded");
  }
  return out;
}

}  // namespace scamrank
