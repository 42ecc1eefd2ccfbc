#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scamrank/corpus.hpp"

namespace scamrank {

// Fraction and count of scam sites among the root-domain-deduplicated
// results of one query (all engines pooled, no rank filtering).
struct QueryToxicity {
  std::string query;
  std::string category;
  int total_sites = 0;
  int scam_sites = 0;
  double toxicity = 0.0;
  int expansion = 0;

  bool operator==(const QueryToxicity&) const = default;
};

using VerdictMap = std::map<std::string, Label>;

// Throws Error("undefined toxicity") for an empty result set, and when a
// root domain has no verdict.
QueryToxicity score_serp(const SerpResultSet& results, const VerdictMap& verdicts, std::string category = "");

struct MaxReference {
  double mean_toxicity = 0.0;
  double mean_expansion = 0.0;
};

// Upper bound from sorting on ground truth: means of the top min(k, n)
// toxicities and, independently, the top min(k, n) expansions. Ties break on
// query text.
MaxReference max_reference(std::span<const QueryToxicity> scored, std::size_t k);

std::string toxicity_to_csv(std::span<const QueryToxicity> rows);
std::vector<QueryToxicity> toxicity_from_csv(std::string_view csv);

}  // namespace scamrank
