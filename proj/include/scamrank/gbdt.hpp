#pragma once

// Gradient-boosted regression trees (Friedman's TreeBoost) over a DesignMatrix.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamrank/encode.hpp"

namespace scamrank {

enum class GbdtLoss { Logistic, SquaredError };

struct GbdtConfig {
  int rounds = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 5;
  GbdtLoss loss = GbdtLoss::Logistic;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const GbdtConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;        // numeric split: value <= threshold goes left
  std::vector<int> categories;   // categorical split: code in set goes left
  bool missing_left = true;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf score before shrinkage

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> values, std::span<const std::uint8_t> missing) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

struct GbdtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;  // prior log-odds (logistic) or mean (squared error)
  GbdtConfig config;
  std::string schema_version;
  std::vector<FeatureKind> column_kinds;

  // base_score + learning_rate * sum of leaf values
  double raw_score(std::span<const double> values, std::span<const std::uint8_t> missing) const;
  // Logistic link for the logistic loss; identity for squared error.
  double predict(std::span<const double> values, std::span<const std::uint8_t> missing) const;
  bool operator==(const GbdtModel&) const = default;
};

class GbdtError : public Error {
 public:
  using Error::Error;
};

// Fits `targets` (0/1 labels for the logistic loss). If `loss_trace` is
// given it receives the mean training loss before the first round and after
// every round.
GbdtModel train_gbdt(const DesignMatrix& matrix, std::span<const double> targets, const GbdtConfig& config,
                     std::vector<double>* loss_trace = nullptr);

double sigmoid(double x);
// Mean training loss of a raw-score vector.
double mean_loss(GbdtLoss loss, std::span<const double> raw, std::span<const double> targets);

nlohmann::json gbdt_to_json(const GbdtModel& m);
GbdtModel gbdt_from_json(const nlohmann::json& j);

}  // namespace scamrank
