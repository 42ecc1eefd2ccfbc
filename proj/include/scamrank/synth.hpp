#pragma once

// Seeded synthetic corpora for tests, acceptance runs and the shipped
// fixture pack.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scamrank/discovery.hpp"
#include "scamrank/lupi.hpp"

namespace scamrank {

// Queries over product categories. Each query's latent scam propensity is a
// logistic function of category-agnostic cue words plus a query-level random
// effect. Ground-truth toxicity is the binomial fraction of scam sites among
// `sites_per_query` distinct results; scam results carry severity words in
// their descriptions that track the latent propensity, while titles carry no
// signal.
struct SyntheticLupiConfig {
  int categories = 5;
  int queries_per_category = 420;
  int sites_per_query = 10;
  double query_effect_std = 0.5;
  std::uint64_t seed = 7;
};

struct SyntheticLupiCorpus {
  std::vector<std::string> categories;
  std::vector<LupiExample> examples;
  VerdictMap verdicts;
  std::vector<double> latent;        // per example scam propensity
  std::vector<double> query_signal;  // cue-only logit, the best any query-only model can know
};

SyntheticLupiCorpus make_lupi_corpus(const SyntheticLupiConfig& cfg);

// Everything `rank` + `discover --mode replay` need, written under `dir`:
// labels.csv, keywords.jsonl, snapshots.jsonl, oracle.json, student.json,
// serp_store.jsonl, train.jsonl and truth.csv (planted verdict per pool
// domain, "unscored" when parked or without a snapshot). Deterministic per
// seed.
struct FixturePackConfig {
  std::uint64_t seed = 11;
  int queries_per_category = 30;
  int categories = 3;
};
void write_fixture_pack(const std::filesystem::path& dir, const FixturePackConfig& cfg);

}  // namespace scamrank
