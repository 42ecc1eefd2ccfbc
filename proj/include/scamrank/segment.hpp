#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scamrank {

struct Segmentation {
  std::vector<std::string> words;
  double cost = 0.0;
  std::size_t count() const { return words.size(); }
};

// Maximum-likelihood word splitting under a Zipf unigram model: the word at
// frequency rank r (0-based) of N costs log((r + 1) * log N). Characters not
// covered by any dictionary word form residue tokens costing
// kResidueBase + kResiduePerChar * length, so adjacent unknown characters
// merge into a single residue.
class WordSegmenter {
 public:
  static constexpr double kResidueBase = 10.0;
  static constexpr double kResiduePerChar = 5.0;

  // `ranked_words` is ordered by descending frequency; duplicates keep the
  // first (best) rank.
  explicit WordSegmenter(const std::vector<std::string>& ranked_words);
  static WordSegmenter from_file(const std::filesystem::path& path);
  static const WordSegmenter& bundled();

  Segmentation split(std::string_view label) const;

  // Cost of `piece` as a single token: dictionary cost if known, otherwise
  // the residue cost.
  double token_cost(std::string_view piece) const;
  bool contains(std::string_view word) const { return cost_.contains(std::string(word)); }

 private:
  std::unordered_map<std::string, double> cost_;
  std::size_t max_word_ = 0;
};

}  // namespace scamrank
