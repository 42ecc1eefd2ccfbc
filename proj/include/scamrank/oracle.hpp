#pragma once

// Scam oracle: a GBDT classifier over encoded feature vectors, its
// persisted form, and stratified k-fold evaluation against a
// logistic-regression baseline.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "scamrank/encode.hpp"
#include "scamrank/gbdt.hpp"

namespace scamrank {

// L2-regularised logistic regression on standardised columns; the single
// comparison baseline for the oracle.
struct LogisticRegression {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> mean, scale;

  static LogisticRegression fit(const DesignMatrix& m, std::span<const double> targets, int iterations = 500,
                                double learning_rate = 0.5, double l2 = 1e-3);
  double predict(std::span<const double> values) const;
};

struct OracleModel {
  Encoding encoding;
  GbdtModel gbdt;

  struct Verdict {
    double probability;
    Label label;
  };

  // SCAM iff probability >= kThreshold.
  static constexpr double kThreshold = 0.5;

  Verdict predict(const FeatureVector& v) const;
  nlohmann::json to_json() const;
  static OracleModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static OracleModel load(const std::filesystem::path& path);
};

// Builds the encoding from `vectors` and trains the GBDT on it.
OracleModel train_oracle(std::span<const FeatureVector> vectors, std::span<const int> labels,
                         const GbdtConfig& config, const FeatureSchema& schema = oracle_schema());

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Metrics binary_metrics(std::span<const int> truth, std::span<const int> predicted);

struct EvalReport {
  std::vector<Metrics> folds;
  Metrics mean;  // per-fold average of P/R/F1; confusion counts summed
  double threshold = OracleModel::kThreshold;
};

enum class ClassifierKind { Gbdt, LogisticRegression };

class StratificationError : public Error {
 public:
  using Error::Error;
};

// Fold id per row; each class is shuffled with `seed` and dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

// Stratified k-fold CV. Encoding dictionaries are rebuilt from each fold's
// training rows.
EvalReport evaluate_cv(std::span<const FeatureVector> vectors, std::span<const int> labels, int k,
                       const GbdtConfig& config, const FeatureSchema& schema = oracle_schema(),
                       ClassifierKind kind = ClassifierKind::Gbdt, std::uint64_t seed = 0);

nlohmann::json eval_report_to_json(const EvalReport& r);

}  // namespace scamrank
