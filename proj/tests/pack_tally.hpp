#pragma once

// Independent tally of a fixture-pack discovery run: reads the raw store
// JSON and planted verdicts directly and counts with plain set arithmetic.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace scamrank::fixtures {

struct Tally {
  std::map<std::string, std::pair<int, int>> per_category;  // scams, total
  int scams = 0, total = 0;
};

inline std::vector<std::vector<std::string>> read_simple_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

// `queries` holds (category, query) pairs; `engines` are lowercase names.
inline Tally tally_pack(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& queries,
                        const std::vector<std::string>& engines) {
  std::map<std::string, std::string> truth;
  for (auto& r : read_simple_csv(dir + "/truth.csv")) truth[r[0]] = r[1];
  std::set<std::string> seeds;
  for (auto& r : read_simple_csv(dir + "/labels.csv")) seeds.insert(r[0]);

  std::map<std::pair<std::string, std::string>, std::set<std::string>> serp_domains;  // (query, engine)
  std::ifstream in(dir + "/serp_store.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    auto& set = serp_domains[{j["query"].get<std::string>(), j["engine"].get<std::string>()}];
    for (auto& e : j["serp"]["entries"]) set.insert(e["root_domain"].get<std::string>());
  }

  std::map<std::string, std::set<std::string>> categories_of;
  for (auto& [cat, q] : queries)
    for (auto& eng : engines)
      for (auto& d : serp_domains.at({q, eng}))
        if (!seeds.count(d)) categories_of[d].insert(cat);

  Tally t;
  for (auto& [cat, q] : queries) t.per_category[cat];
  for (auto& [d, cats] : categories_of) {
    const auto& label = truth.at(d);
    if (label == "unscored") continue;
    bool scam = label == "scam";
    ++t.total;
    t.scams += scam;
    for (auto& c : cats) {
      ++t.per_category[c].second;
      t.per_category[c].first += scam;
    }
  }
  return t;
}

}  // namespace scamrank::fixtures
