#include "scamrank/toxicity.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace scamrank {

QueryToxicity score_serp(const SerpResultSet& results, const VerdictMap& verdicts, std::string category) {
  if (results.entries.empty()) throw Error("undefined toxicity: query '" + results.query + "' has no results");
  std::set<std::string> domains;
  for (auto& e : results.entries) {
    if (e.root_domain.empty()) throw SchemaError("SERP entry without root_domain: " + e.url);
    domains.insert(e.root_domain);
  }
  QueryToxicity q;
  q.query = results.query;
  q.category = std::move(category);
  q.total_sites = static_cast<int>(domains.size());
  for (auto& d : domains) {
    auto it = verdicts.find(d);
    if (it == verdicts.end()) throw Error("no verdict for root domain " + d);
    if (it->second == Label::Scam) ++q.scam_sites;
  }
  q.expansion = q.scam_sites;
  q.toxicity = static_cast<double>(q.scam_sites) / static_cast<double>(q.total_sites);
  return q;
}

MaxReference max_reference(std::span<const QueryToxicity> scored, std::size_t k) {
  MaxReference out;
  if (scored.empty() || k == 0) return out;
  std::vector<const QueryToxicity*> by_tox, by_exp;
  for (auto& q : scored) {
    by_tox.push_back(&q);
    by_exp.push_back(&q);
  }
  std::sort(by_tox.begin(), by_tox.end(), [](auto* a, auto* b) {
    return a->toxicity != b->toxicity ? a->toxicity > b->toxicity : a->query < b->query;
  });
  std::sort(by_exp.begin(), by_exp.end(), [](auto* a, auto* b) {
    return a->expansion != b->expansion ? a->expansion > b->expansion : a->query < b->query;
  });
  const std::size_t m = std::min(k, scored.size());
  for (std::size_t i = 0; i < m; ++i) {
    out.mean_toxicity += by_tox[i]->toxicity;
    out.mean_expansion += by_exp[i]->expansion;
  }
  out.mean_toxicity /= static_cast<double>(m);
  out.mean_expansion /= static_cast<double>(m);
  return out;
}

std::string toxicity_to_csv(std::span<const QueryToxicity> rows) {
  std::string out = "query,category,total_sites,scam_sites,toxicity,expansion\n";
  for (auto& q : rows) {
    out += csv_escape(q.query) + "," + csv_escape(q.category) + "," + std::to_string(q.total_sites) + "," +
           std::to_string(q.scam_sites) + "," + format_double(q.toxicity) + "," + std::to_string(q.expansion) + "\n";
  }
  return out;
}

std::vector<QueryToxicity> toxicity_from_csv(std::string_view csv) {
  std::vector<QueryToxicity> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1 || trim(line).empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != 6) throw ParseError("expected 6 columns in toxicity.csv", no);
    try {
      QueryToxicity q;
      q.query = f[0];
      q.category = f[1];
      q.total_sites = std::stoi(f[2]);
      q.scam_sites = std::stoi(f[3]);
      q.toxicity = std::stod(f[4]);
      q.expansion = std::stoi(f[5]);
      out.push_back(std::move(q));
    } catch (const std::logic_error&) {
      throw ParseError("bad number in toxicity.csv", no);
    }
  }
  return out;
}

}  // namespace scamrank
