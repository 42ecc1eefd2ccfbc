#pragma once

// Branded vs un-branded keyword filter: lexicon rules plus an adapter hook
// for an external classifier (see docs/branded_prompt.md).

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scamrank/common.hpp"

namespace scamrank {

struct BrandLexicon {
  std::set<std::string> brands;     // lowercase phrases
  std::set<std::string> ambiguous;  // subset of brands that are also generic words
  std::set<std::string> context;    // product-context tokens that make an ambiguous brand fire

  // Normalizes entries and checks ambiguous ⊆ brands.
  static BrandLexicon make(std::vector<std::string> brands, std::vector<std::string> ambiguous,
                           std::vector<std::string> context);
  static BrandLexicon from_files(const std::filesystem::path& brands, const std::filesystem::path& ambiguous,
                                 const std::filesystem::path& context);
  static const BrandLexicon& bundled();
};

struct BrandVerdict {
  bool branded = false;
  std::optional<std::string> matched_brand;
  bool operator==(const BrandVerdict&) const = default;
};

// Whole-token phrase match anywhere in the keyword. Ambiguous entries only
// fire when a context token sits immediately before or after the phrase.
BrandVerdict classify_branded(std::string_view keyword, const BrandLexicon& lexicon);

class BrandClassifier {
 public:
  virtual ~BrandClassifier() = default;
  virtual BrandVerdict classify(std::string_view keyword) const = 0;
};

class LexiconBrandClassifier : public BrandClassifier {
 public:
  explicit LexiconBrandClassifier(const BrandLexicon& lexicon) : lexicon_(&lexicon) {}
  BrandVerdict classify(std::string_view keyword) const override { return classify_branded(keyword, *lexicon_); }

 private:
  const BrandLexicon* lexicon_;
};

struct BrandMetrics {
  int tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// (keyword, branded?) pairs; metrics are for the BRANDED class.
BrandMetrics evaluate_filter(std::span<const std::pair<std::string, bool>> labeled, const BrandClassifier& classifier);
BrandMetrics evaluate_filter(std::span<const std::pair<std::string, bool>> labeled, const BrandLexicon& lexicon);

// TSV: keyword<TAB>branded|unbranded
std::vector<std::pair<std::string, bool>> read_brand_fixture(const std::filesystem::path& path);

}  // namespace scamrank
