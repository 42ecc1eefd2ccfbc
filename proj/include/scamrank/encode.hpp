#pragma once

// Numeric design-matrix encoding of FeatureVectors.
//
// Column layout: one value column per schema slot (categorical slots hold
// dictionary codes, 0 reserved for unseen/missing), followed by one
// missing-indicator column per non-categorical slot. Missing numeric and
// boolean values hold kMissingSentinel and are flagged in `missing`.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamrank/featurizer.hpp"

namespace scamrank {

inline constexpr double kMissingSentinel = 0.0;

struct ColumnMeta {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  // Categorical: token -> code (>= 1). Built from training rows only.
  std::map<std::string, int> dictionary;
  // Indicator columns point at the slot they flag.
  std::optional<std::size_t> indicator_of;
  bool operator==(const ColumnMeta&) const = default;
};

struct Encoding {
  FeatureSchema schema;
  std::vector<ColumnMeta> columns;
  bool operator==(const Encoding&) const = default;
};

struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;         // row-major rows x cols
  std::vector<std::uint8_t> missing;  // row-major rows x cols
  std::optional<std::vector<int>> labels;  // 1 = scam, 0 = benign
  Encoding encoding;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols + c] != 0; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<const std::uint8_t> row_missing(std::size_t r) const { return {missing.data() + r * cols, cols}; }
};

// Builds the dictionaries from `vectors` and encodes them.
DesignMatrix encode_dataset(std::span<const FeatureVector> vectors, const std::optional<std::vector<int>>& labels,
                            const FeatureSchema& schema = oracle_schema());

// Encodes with frozen dictionaries (test-time); unseen tokens map to code 0.
DesignMatrix encode_with(const Encoding& encoding, std::span<const FeatureVector> vectors,
                         const std::optional<std::vector<int>>& labels = std::nullopt);

// Encodes a single vector into (values, missing) rows.
void encode_row(const Encoding& encoding, const FeatureVector& v, std::span<double> values,
                std::span<std::uint8_t> missing);

nlohmann::json encoding_to_json(const Encoding& e);
Encoding encoding_from_json(const nlohmann::json& j);

}  // namespace scamrank
