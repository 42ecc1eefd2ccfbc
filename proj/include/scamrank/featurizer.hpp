#pragma once

// Oracle feature extraction: five feature groups (ranking, DNS, URL, WHOIS,
// landing-page content) computed from an offline DomainSnapshot.

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scamrank/corpus.hpp"
#include "scamrank/public_suffix.hpp"
#include "scamrank/segment.hpp"

namespace scamrank {

enum class FeatureKind { Boolean, Numeric, Categorical };
enum class FeatureGroup { Ranking, Dns, Url, Whois, Content };

std::string_view to_string(FeatureKind k);
std::string_view to_string(FeatureGroup g);

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  FeatureGroup group;
  bool operator==(const FeatureSpec&) const = default;
};

using FeatureSchema = std::vector<FeatureSpec>;

inline constexpr std::string_view kSchemaVersion = "scamrank-features/1";
inline constexpr std::size_t kOracleFeatureCount = 103;

// The fixed, versioned 103-entry oracle schema.
const FeatureSchema& oracle_schema();
nlohmann::json schema_to_json(const FeatureSchema& schema, std::string_view version = kSchemaVersion);
FeatureSchema schema_from_json(const nlohmann::json& j);

struct Missing {
  bool operator==(const Missing&) const = default;
};

// Booleans are stored as 0.0 / 1.0.
using FeatureValue = std::variant<Missing, double, std::string>;

inline bool is_missing(const FeatureValue& v) { return std::holds_alternative<Missing>(v); }

struct FeatureVector {
  std::vector<FeatureValue> values;
  bool operator==(const FeatureVector&) const = default;
};

// Throws SchemaError unless every value matches its slot's kind.
void validate(const FeatureVector& v, const FeatureSchema& schema);

struct FeaturizerLists {
  std::set<std::string> cheap_tlds;        // public suffixes, no leading dot
  std::set<std::string> cheap_registrars;  // lowercase substrings of registrar names
  std::set<std::string> free_email_domains;

  static FeaturizerLists bundled();
};

class Featurizer {
 public:
  Featurizer(const PublicSuffixList& psl, const WordSegmenter& words, FeaturizerLists lists);
  // Bundled PSL, word table and lists.
  static const Featurizer& bundled();

  FeatureVector extract(const DomainSnapshot& snap) const;
  const FeatureSchema& schema() const { return oracle_schema(); }

  // Subword count of the registrable label of `root_domain` (hyphen-separated
  // parts are segmented independently).
  std::size_t domain_subwords(std::string_view root_domain) const;

 private:
  const PublicSuffixList* psl_;
  const WordSegmenter* words_;
  FeaturizerLists lists_;
};

// features.csv: `root_domain` key column followed by the schema names.
// Missing values are empty cells.
struct FeatureTable {
  std::vector<std::string> keys;
  std::vector<FeatureVector> vectors;
};

std::string features_to_csv(const FeatureTable& table, const FeatureSchema& schema = oracle_schema());
FeatureTable features_from_csv(std::string_view csv, const FeatureSchema& schema = oracle_schema());

}  // namespace scamrank
