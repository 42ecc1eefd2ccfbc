#pragma once

// Discovery loop: fetch (or replay) SERPs for ranked keywords, score newly
// surfaced root domains with the oracle and summarize them per category.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scamrank/corpus.hpp"
#include "scamrank/featurizer.hpp"
#include "scamrank/lupi.hpp"
#include "scamrank/oracle.hpp"

namespace scamrank {

enum class FetchMode { Replay, Live };
FetchMode parse_fetch_mode(std::string_view s);

// Content-addressed JSONL store of SERP captures keyed by
// (query, engine, capture date).
class FixtureStore {
 public:
  FixtureStore() = default;
  // Missing file = empty store; new captures are appended to `path`.
  explicit FixtureStore(std::filesystem::path path);

  static std::string key(std::string_view query, Engine engine, std::string_view capture_date);

  // Without a date, the most recent capture wins.
  std::optional<SerpResultSet> get(std::string_view query, Engine engine,
                                   std::optional<std::string> capture_date = std::nullopt) const;
  // Stored JSON text of a capture, exactly as written.
  std::optional<std::string> raw(std::string_view query, Engine engine,
                                 std::optional<std::string> capture_date = std::nullopt) const;
  void put(const SerpResultSet& serp, Engine engine, const std::string& capture_date);
  std::size_t size() const { return records_.size(); }

 private:
  struct Record {
    std::string query;
    Engine engine;
    std::string date;
    std::string serp_json;
  };
  const Record* find(std::string_view query, Engine engine, const std::optional<std::string>& date) const;

  std::filesystem::path path_;
  std::map<std::string, Record> records_;  // by key
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class FetchError : public Error {
 public:
  using Error::Error;
};

// Live SERP source; implementations throw TransportError on failure.
class SerpTransport {
 public:
  virtual ~SerpTransport() = default;
  virtual SerpResultSet fetch(const std::string& query, Engine engine, int depth) = 0;
};

// DataForSEO SERP API client. Credentials come from DATAFORSEO_LOGIN and
// DATAFORSEO_PASSWORD; throws Error when they are not set.
std::unique_ptr<SerpTransport> make_dataforseo_transport();

struct FetchLimits {
  std::chrono::milliseconds min_delay{1000};  // between requests to one engine
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled per retry
  int depth = 20;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

class SerpFetcher {
 public:
  // `transport` may be null in REPLAY mode.
  SerpFetcher(FetchMode mode, FixtureStore& store, SerpTransport* transport = nullptr, FetchLimits limits = {},
              std::string capture_date = "");

  // REPLAY returns the stored capture; LIVE rate-limits per engine, retries
  // with backoff and records the response in the store under today's date
  // (or the configured capture date).
  SerpResultSet fetch(const std::string& query, Engine engine);
  SerpResultSet fetch(const std::string& query, std::string_view engine) { return fetch(query, parse_engine(engine)); }

  void set_sleeper(Sleeper s) { sleep_ = std::move(s); }
  std::size_t requests() const { return requests_; }

 private:
  FetchMode mode_;
  FixtureStore* store_;
  SerpTransport* transport_;
  FetchLimits limits_;
  std::string capture_date_;
  std::map<Engine, std::chrono::steady_clock::time_point> last_;
  Sleeper sleep_;
  std::size_t requests_ = 0;
};

struct CategoryCount {
  std::string category;
  int discovered_scams = 0;
  int total_sites = 0;
  double scam_fraction = 0.0;
  bool operator==(const CategoryCount&) const = default;
};

struct DiscoveryReport {
  std::vector<CategoryCount> categories;  // sorted by name
  CategoryCount all{"ALL"};               // each domain counted once
  std::map<std::string, double> exposure;  // engine -> share of discovered scams within rank <= k
  int exposure_k = 20;
  int not_scored = 0;                     // new domains without an admissible snapshot
  std::vector<std::string> scam_domains;  // sorted
  std::string config_digest;
  bool operator==(const DiscoveryReport&) const = default;
};

class SnapshotSource {
 public:
  virtual ~SnapshotSource() = default;
  virtual std::optional<DomainSnapshot> get(const std::string& root_domain) const = 0;
};

// Snapshots indexed by the root domain of their URL.
class SnapshotIndex : public SnapshotSource {
 public:
  SnapshotIndex(std::span<const DomainSnapshot> snaps, const PublicSuffixList& psl);
  std::optional<DomainSnapshot> get(const std::string& root_domain) const override;

 private:
  std::map<std::string, DomainSnapshot> by_domain_;
};

struct DiscoveryConfig {
  std::vector<Engine> engines{Engine::Google};
  int exposure_k = 20;
  std::string digest_salt;  // extra run configuration folded into the digest
};

// Root domains are deduplicated across queries; domains in `seed_labels` are
// excluded; a domain is attributed to every category whose queries surfaced
// it. total_sites counts scored new domains.
DiscoveryReport run_discovery(std::span<const RankedKeyword> ranked, SerpFetcher& fetcher, const OracleModel& oracle,
                              const Featurizer& featurizer, const SnapshotSource& snapshots,
                              const std::set<std::string>& seed_labels, const ParkedDetector& parked,
                              const PublicSuffixList& psl, const DiscoveryConfig& cfg);

enum class ReportFormat { Csv, Json };

std::string report_to_csv(const DiscoveryReport& r);
nlohmann::json report_to_json(const DiscoveryReport& r);
DiscoveryReport report_from_json(const nlohmann::json& j);
// Counts only (category rows and the ALL row).
DiscoveryReport report_from_csv(std::string_view csv);
void emit_report(const DiscoveryReport& r, ReportFormat format, const std::filesystem::path& path);

}  // namespace scamrank
