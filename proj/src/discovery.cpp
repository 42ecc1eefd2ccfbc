#include "scamrank/discovery.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "scamrank/public_suffix.hpp"

namespace scamrank {

using nlohmann::json;

FetchMode parse_fetch_mode(std::string_view s) {
  auto l = to_lower(s);
  if (l == "replay") return FetchMode::Replay;
  if (l == "live") return FetchMode::Live;
  throw Error("unknown fetch mode: " + std::string(s));
}

FixtureStore::FixtureStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed fixture record: ") + e.what(), no);
    }
    try {
      Record r{j.at("query").get<std::string>(), parse_engine(j.at("engine").get<std::string>()),
               j.at("captured").get<std::string>(), j.at("serp").dump()};
      auto k = key(r.query, r.engine, r.date);
      if (j.contains("key") && j["key"].get<std::string>() != k)
        throw ParseError("fixture key does not match its content", no);
      records_[k] = std::move(r);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad fixture record: ") + e.what(), no);
    }
  }
}

std::string FixtureStore::key(std::string_view query, Engine engine, std::string_view capture_date) {
  std::string s = to_lower(trim(query));
  s += '|';
  s += to_string(engine);
  s += '|';
  s += capture_date;
  return hex64(fnv1a(s));
}

const FixtureStore::Record* FixtureStore::find(std::string_view query, Engine engine,
                                               const std::optional<std::string>& date) const {
  if (date) {
    auto it = records_.find(key(query, engine, *date));
    return it == records_.end() ? nullptr : &it->second;
  }
  const Record* best = nullptr;
  auto q = to_lower(trim(query));
  for (auto& [k, r] : records_)
    if (r.engine == engine && to_lower(trim(r.query)) == q && (!best || r.date > best->date)) best = &r;
  return best;
}

std::optional<std::string> FixtureStore::raw(std::string_view query, Engine engine,
                                             std::optional<std::string> capture_date) const {
  auto* r = find(query, engine, capture_date);
  if (!r) return std::nullopt;
  return r->serp_json;
}

std::optional<SerpResultSet> FixtureStore::get(std::string_view query, Engine engine,
                                               std::optional<std::string> capture_date) const {
  auto* r = find(query, engine, capture_date);
  if (!r) return std::nullopt;
  return serp_from_json(json::parse(r->serp_json));
}

void FixtureStore::put(const SerpResultSet& serp, Engine engine, const std::string& capture_date) {
  Record r{serp.query, engine, capture_date, serp_to_json(serp).dump()};
  auto k = key(r.query, engine, capture_date);
  if (!path_.empty()) {
    json line{{"key", k}, {"query", r.query}, {"engine", to_string(engine)}, {"captured", capture_date},
              {"serp", json::parse(r.serp_json)}};
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to fixture store " + path_.string());
    out << line.dump() << "\n";
  }
  records_[k] = std::move(r);
}

SerpFetcher::SerpFetcher(FetchMode mode, FixtureStore& store, SerpTransport* transport, FetchLimits limits,
                         std::string capture_date)
    : mode_(mode),
      store_(&store),
      transport_(transport),
      limits_(limits),
      capture_date_(std::move(capture_date)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (mode_ == FetchMode::Live && !transport_) throw Error("LIVE mode needs a SERP transport");
}

SerpResultSet SerpFetcher::fetch(const std::string& query, Engine engine) {
  if (mode_ == FetchMode::Replay) {
    auto s = store_->get(query, engine, capture_date_.empty() ? std::nullopt : std::optional(capture_date_));
    if (!s) throw FetchError("no fixture for query '" + query + "' on " + std::string(to_string(engine)));
    return *s;
  }
  for (int attempt = 0;; ++attempt) {
    auto it = last_.find(engine);
    if (it != last_.end()) {
      auto wait = std::chrono::ceil<std::chrono::milliseconds>(
          it->second + limits_.min_delay - std::chrono::steady_clock::now());
      if (wait.count() > 0) sleep_(wait);
    }
    last_[engine] = std::chrono::steady_clock::now();
    ++requests_;
    try {
      auto serp = transport_->fetch(query, engine, limits_.depth);
      serp.query = query;
      for (auto& e : serp.entries) e.engine = engine;
      serp.normalize();
      auto date = capture_date_;
      if (date.empty()) date = format_date(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
      store_->put(serp, engine, date);
      return serp;
    } catch (const TransportError& e) {
      if (attempt >= limits_.max_retries)
        throw FetchError("giving up on '" + query + "' after " + std::to_string(attempt + 1) +
                         " attempts: " + e.what());
      sleep_(limits_.backoff * (1 << attempt));
    }
  }
}

SnapshotIndex::SnapshotIndex(std::span<const DomainSnapshot> snaps, const PublicSuffixList& psl) {
  for (auto& s : snaps) by_domain_.emplace(psl.root_domain(s.url), s);
}

std::optional<DomainSnapshot> SnapshotIndex::get(const std::string& root_domain) const {
  auto it = by_domain_.find(root_domain);
  if (it == by_domain_.end()) return std::nullopt;
  return it->second;
}

DiscoveryReport run_discovery(std::span<const RankedKeyword> ranked, SerpFetcher& fetcher, const OracleModel& oracle,
                              const Featurizer& featurizer, const SnapshotSource& snapshots,
                              const std::set<std::string>& seed_labels, const ParkedDetector& parked,
                              const PublicSuffixList& psl, const DiscoveryConfig& cfg) {
  DiscoveryReport report;
  report.exposure_k = cfg.exposure_k;

  std::string digest = cfg.digest_salt + "|k=" + std::to_string(cfg.exposure_k) + "|engines=";
  for (auto e : cfg.engines) digest += std::string(to_string(e)) + ",";
  digest += "|oracle=" + hex64(fnv1a(oracle.to_json().dump()));
  std::vector<RankedKeyword> sorted(ranked.begin(), ranked.end());
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) {
    return std::tie(a.category, a.query) < std::tie(b.category, b.query);
  });
  for (auto& r : sorted) digest += "|" + r.category + ":" + r.query;
  report.config_digest = hex64(fnv1a(digest));

  struct Seen {
    std::set<std::string> categories;
    std::map<Engine, int> best_rank;
  };
  std::map<std::string, Seen> seen;
  for (auto& r : sorted) {
    for (auto engine : cfg.engines) {
      auto serp = fetcher.fetch(r.query, engine);
      for (auto& e : serp.entries) {
        auto root = e.root_domain.empty() ? psl.root_domain(e.url) : e.root_domain;
        if (seed_labels.count(root)) continue;
        auto& s = seen[root];
        s.categories.insert(r.category);
        auto [it, fresh] = s.best_rank.emplace(e.engine, e.rank);
        if (!fresh) it->second = std::min(it->second, e.rank);
      }
    }
  }

  std::map<std::string, CategoryCount> per_cat;
  for (auto& r : sorted) per_cat[r.category].category = r.category;
  std::map<Engine, std::pair<int, int>> exposure;  // within k, surfaced
  for (auto e : cfg.engines) exposure[e] = {0, 0};

  for (auto& [root, s] : seen) {
    auto snap = snapshots.get(root);
    if (!snap || !parked.admits(*snap)) {
      ++report.not_scored;
      continue;
    }
    bool scam = oracle.predict(featurizer.extract(*snap)).label == Label::Scam;
    ++report.all.total_sites;
    for (auto& c : s.categories) ++per_cat[c].total_sites;
    if (!scam) continue;
    ++report.all.discovered_scams;
    for (auto& c : s.categories) ++per_cat[c].discovered_scams;
    report.scam_domains.push_back(root);
    for (auto& [engine, rank] : s.best_rank) {
      auto& [within, surfaced] = exposure[engine];
      ++surfaced;
      if (rank <= cfg.exposure_k) ++within;
    }
  }

  auto finish = [](CategoryCount& c) {
    c.scam_fraction = c.total_sites ? static_cast<double>(c.discovered_scams) / c.total_sites : 0.0;
  };
  for (auto& [name, c] : per_cat) {
    finish(c);
    report.categories.push_back(c);
  }
  finish(report.all);
  for (auto& [engine, counts] : exposure)
    report.exposure[std::string(to_string(engine))] =
        counts.second ? static_cast<double>(counts.first) / counts.second : 0.0;
  return report;
}

std::string report_to_csv(const DiscoveryReport& r) {
  std::string out = "category,discovered_scams,total_sites,scam_fraction\n";
  if (r.categories.empty()) return out;
  auto row = [&](const CategoryCount& c) {
    out += csv_escape(c.category) + "," + std::to_string(c.discovered_scams) + "," + std::to_string(c.total_sites) +
           "," + format_double(c.scam_fraction) + "\n";
  };
  for (auto& c : r.categories) row(c);
  row(r.all);
  return out;
}

json report_to_json(const DiscoveryReport& r) {
  auto count = [](const CategoryCount& c) {
    return json{{"category", c.category},
                {"discovered_scams", c.discovered_scams},
                {"total_sites", c.total_sites},
                {"scam_fraction", c.scam_fraction}};
  };
  json cats = json::array();
  for (auto& c : r.categories) cats.push_back(count(c));
  return json{{"categories", cats},
              {"all", count(r.all)},
              {"exposure", r.exposure},
              {"exposure_k", r.exposure_k},
              {"not_scored", r.not_scored},
              {"scam_domains", r.scam_domains},
              {"config_digest", r.config_digest}};
}

DiscoveryReport report_from_json(const json& j) {
  auto count = [](const json& c) {
    return CategoryCount{c.at("category").get<std::string>(), c.at("discovered_scams").get<int>(),
                         c.at("total_sites").get<int>(), c.at("scam_fraction").get<double>()};
  };
  try {
    DiscoveryReport r;
    for (auto& c : j.at("categories")) r.categories.push_back(count(c));
    r.all = count(j.at("all"));
    r.exposure = j.at("exposure").get<std::map<std::string, double>>();
    r.exposure_k = j.at("exposure_k").get<int>();
    r.not_scored = j.at("not_scored").get<int>();
    r.scam_domains = j.at("scam_domains").get<std::vector<std::string>>();
    r.config_digest = j.at("config_digest").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad discovery report: ") + e.what());
  }
}

DiscoveryReport report_from_csv(std::string_view csv) {
  DiscoveryReport r;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1 || trim(line).empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != 4) throw ParseError("expected 4 columns in discovery report", no);
    CategoryCount c;
    try {
      c = {f[0], std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3])};
    } catch (const std::logic_error&) {
      throw ParseError("bad number in discovery report", no);
    }
    if (c.category == "ALL") r.all = c;
    else r.categories.push_back(c);
  }
  return r;
}

void emit_report(const DiscoveryReport& r, ReportFormat format, const std::filesystem::path& path) {
  write_file(path, format == ReportFormat::Csv ? report_to_csv(r) : report_to_json(r).dump(2) + "\n");
}

}  // namespace scamrank
