#include "scamrank/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scamrank/common.hpp"

namespace scamrank {

WordSegmenter::WordSegmenter(const std::vector<std::string>& ranked_words) {
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(ranked_words.size(), 2)));
  for (std::size_t r = 0; r < ranked_words.size(); ++r) {
    const auto& w = ranked_words[r];
    if (w.empty()) continue;
    if (cost_.emplace(w, std::log(static_cast<double>(r + 1) * log_n)).second)
      max_word_ = std::max(max_word_, w.size());
  }
}

WordSegmenter WordSegmenter::from_file(const std::filesystem::path& path) {
  return WordSegmenter(read_lines(path));
}

const WordSegmenter& WordSegmenter::bundled() {
  static const WordSegmenter seg = from_file(data_dir() / "wordfreq.txt");
  return seg;
}

double WordSegmenter::token_cost(std::string_view piece) const {
  if (auto it = cost_.find(std::string(piece)); it != cost_.end()) return it->second;
  return kResidueBase + kResiduePerChar * static_cast<double>(piece.size());
}

Segmentation WordSegmenter::split(std::string_view label) const {
  Segmentation out;
  const std::size_t n = label.size();
  if (n == 0) return out;
  // best[i]: minimal cost of label[0, i); ties prefer fewer tokens.
  std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> tokens(n + 1, 0);
  std::vector<std::size_t> back(n + 1, 0);
  best[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const std::string_view piece = label.substr(j, i - j);
      double c = best[j] + token_cost(piece);
      std::size_t t = tokens[j] + 1;
      if (c < best[i] - 1e-12 || (std::abs(c - best[i]) <= 1e-12 && t < tokens[i])) {
        best[i] = c;
        tokens[i] = t;
        back[i] = j;
      }
    }
  }
  for (std::size_t i = n; i > 0; i = back[i]) out.words.emplace_back(label.substr(back[i], i - back[i]));
  std::reverse(out.words.begin(), out.words.end());
  out.cost = best[n];
  return out;
}

}  // namespace scamrank
