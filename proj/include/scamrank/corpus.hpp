#pragma once

// Data model and ingestion: domain snapshots, keyword suggestions, SERP
// fixtures and seed labels.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scamrank/common.hpp"

namespace scamrank {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DD"
Date parse_date(std::string_view s);
std::string format_date(Date d);
// "YYYY-MM-DDTHH:MM:SSZ" or a bare date (midnight UTC).
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

enum class Engine { Google, Bing, Baidu, Naver };
enum class Competition { Low, Medium, High };
enum class Label { Scam, Benign };

class UnknownEngine : public Error {
 public:
  explicit UnknownEngine(const std::string& name) : Error("unknown engine: " + name) {}
};

std::string_view to_string(Engine e);
std::string_view to_string(Competition c);
std::string_view to_string(Label l);
Engine parse_engine(std::string_view s);
Competition parse_competition(std::string_view s);
Label parse_label(std::string_view s);

struct Whois {
  std::optional<Date> created;
  std::optional<Date> expires;
  std::optional<std::string> registrar;
  std::optional<std::string> registrar_country;
  std::optional<std::string> registrant_country;
  std::optional<bool> privacy;
  std::optional<std::string> registrant_email_domain;

  bool operator==(const Whois&) const = default;
};

struct Ranks {
  std::optional<std::int64_t> tranco;
  std::optional<std::int64_t> majestic;
  std::optional<std::int64_t> majestic_refips;
  std::optional<std::int64_t> majestic_refsubnets;
  std::optional<std::int64_t> majestic_tldrank;
  std::optional<std::int64_t> cisco;

  bool operator==(const Ranks&) const = default;
};

// Offline capture of one website. Features are always computed from the
// final landing page (`final_url`, `html`).
struct DomainSnapshot {
  std::string url;
  std::optional<Timestamp> fetched_at;
  int http_status = 200;  // 0 = non-resolving
  std::string final_url;
  std::string html;
  std::map<std::string, std::vector<std::string>> dns;  // upper-case record type -> records
  Whois whois;
  Ranks ranks;

  bool non_resolving() const { return http_status == 0; }
  bool operator==(const DomainSnapshot&) const = default;
};

DomainSnapshot parse_snapshot(std::string_view json_line, std::size_t line_no = 1);
nlohmann::json snapshot_to_json(const DomainSnapshot& s);
std::vector<DomainSnapshot> read_snapshots(const std::filesystem::path& path);
void write_snapshots(const std::filesystem::path& path, const std::vector<DomainSnapshot>& snaps);

struct KeywordSuggestion {
  std::string text;  // lowercased, trimmed
  std::string source_domain;
  std::string category;
  Competition competition = Competition::High;
  std::optional<std::int64_t> monthly_volume;

  bool operator==(const KeywordSuggestion&) const = default;
};

KeywordSuggestion parse_keyword(std::string_view json_line, std::size_t line_no = 1);
nlohmann::json keyword_to_json(const KeywordSuggestion& k);
std::vector<KeywordSuggestion> read_keywords(const std::filesystem::path& path);
void write_keywords(const std::filesystem::path& path, const std::vector<KeywordSuggestion>& kws);

struct SerpEntry {
  Engine engine = Engine::Google;
  int rank = 1;
  std::string url;
  std::string root_domain;
  std::string title;
  std::string description;

  bool operator==(const SerpEntry&) const = default;
};

struct SerpResultSet {
  std::string query;
  std::vector<SerpEntry> entries;

  // Sorts by (engine, rank); throws SchemaError on duplicate (engine, rank).
  void normalize();
  bool operator==(const SerpResultSet&) const = default;
};

SerpResultSet serp_from_json(const nlohmann::json& j);
nlohmann::json serp_to_json(const SerpResultSet& s);
std::vector<SerpResultSet> read_serps(const std::filesystem::path& path);
void write_serps(const std::filesystem::path& path, const std::vector<SerpResultSet>& serps);

class PublicSuffixList;
// Fills empty `root_domain` fields from the entry URL.
void fill_root_domains(SerpResultSet& serp, const PublicSuffixList& psl);

struct LabeledDomain {
  std::string root_domain;
  Label label = Label::Benign;
  std::string category;

  bool operator==(const LabeledDomain&) const = default;
};

// labels.csv: root_domain,label,category (header optional). Duplicate root
// domains are rejected.
std::vector<LabeledDomain> read_labels(const std::filesystem::path& path);
std::vector<LabeledDomain> parse_labels(std::string_view csv);
void write_labels(const std::filesystem::path& path, const std::vector<LabeledDomain>& labels);

enum class PageState { Live, Parked, Unreachable };
std::string_view to_string(PageState s);

// Case-insensitive regex filter over landing-page HTML for registrar parking
// templates. Patterns come from a config file, one ECMAScript regex per line.
class ParkedDetector {
 public:
  explicit ParkedDetector(const std::vector<std::string>& patterns);
  static ParkedDetector from_file(const std::filesystem::path& path);
  static ParkedDetector bundled();

  PageState check(const DomainSnapshot& snap) const;
  // Pipeline admission: http_status >= 200 and not parked.
  bool admits(const DomainSnapshot& snap) const;
  std::size_t size() const { return patterns_.size(); }

 private:
  std::vector<std::regex> patterns_;
};

}  // namespace scamrank
