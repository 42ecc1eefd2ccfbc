#include "scamrank/oracle.hpp"

#include <algorithm>
#include <random>

namespace scamrank {

using nlohmann::json;

OracleModel::Verdict OracleModel::predict(const FeatureVector& v) const {
  if (encoding.schema.size() != v.values.size())
    throw SchemaError("feature vector does not match the model schema");
  std::vector<double> values(encoding.columns.size());
  std::vector<std::uint8_t> missing(encoding.columns.size());
  encode_row(encoding, v, values, missing);
  double p = gbdt.predict(values, missing);
  return {p, p >= kThreshold ? Label::Scam : Label::Benign};
}

json OracleModel::to_json() const {
  return json{{"format", "scamrank-oracle/1"}, {"encoding", encoding_to_json(encoding)}, {"gbdt", gbdt_to_json(gbdt)}};
}

OracleModel OracleModel::from_json(const json& j) {
  if (j.value("format", "") != "scamrank-oracle/1") throw SchemaError("not a scamrank-oracle/1 model");
  OracleModel m;
  m.encoding = encoding_from_json(j.at("encoding"));
  m.gbdt = gbdt_from_json(j.at("gbdt"));
  if (m.gbdt.column_kinds.size() != m.encoding.columns.size())
    throw SchemaError("model column count does not match its encoding");
  return m;
}

void OracleModel::save(const std::filesystem::path& path) const { write_file(path, to_json().dump(1) + "\n"); }

OracleModel OracleModel::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("malformed model file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

OracleModel train_oracle(std::span<const FeatureVector> vectors, std::span<const int> labels,
                         const GbdtConfig& config, const FeatureSchema& schema) {
  if (labels.size() != vectors.size()) throw SchemaError("label count does not match vector count");
  OracleModel m;
  auto matrix = encode_dataset(vectors, std::nullopt, schema);
  std::vector<double> targets(labels.begin(), labels.end());
  m.gbdt = train_gbdt(matrix, targets, config);
  m.encoding = matrix.encoding;
  return m;
}

Metrics binary_metrics(std::span<const int> truth, std::span<const int> predicted) {
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1 && predicted[i] == 1) ++m.tp;
    else if (truth[i] == 0 && predicted[i] == 1) ++m.fp;
    else if (truth[i] == 0) ++m.tn;
    else ++m.fn;
  }
  // Undefined ratios count as 0.
  m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw StratificationError("k must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
    throw StratificationError("each class needs at least k=" + std::to_string(k) + " examples (have " +
                              std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) + " negative)");
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), -1);
  int next = 0;
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    for (auto i : *cls) {
      fold[i] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

EvalReport evaluate_cv(std::span<const FeatureVector> vectors, std::span<const int> labels, int k,
                       const GbdtConfig& config, const FeatureSchema& schema, ClassifierKind kind,
                       std::uint64_t seed) {
  if (labels.size() != vectors.size()) throw SchemaError("label count does not match vector count");
  auto fold = stratified_folds(labels, k, seed);
  EvalReport report;
  for (int f = 0; f < k; ++f) {
    std::vector<FeatureVector> train, test;
    std::vector<int> train_y, test_y;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (fold[i] == f) {
        test.push_back(vectors[i]);
        test_y.push_back(labels[i]);
      } else {
        train.push_back(vectors[i]);
        train_y.push_back(labels[i]);
      }
    }
    auto train_m = encode_dataset(train, std::nullopt, schema);
    auto test_m = encode_with(train_m.encoding, test);
    std::vector<double> targets(train_y.begin(), train_y.end());
    std::vector<int> predicted(test.size());
    if (kind == ClassifierKind::Gbdt) {
      auto model = train_gbdt(train_m, targets, config);
      for (std::size_t r = 0; r < test.size(); ++r)
        predicted[r] = model.predict(test_m.row(r), test_m.row_missing(r)) >= OracleModel::kThreshold;
    } else {
      auto model = LogisticRegression::fit(train_m, targets);
      for (std::size_t r = 0; r < test.size(); ++r)
        predicted[r] = model.predict(test_m.row(r)) >= OracleModel::kThreshold;
    }
    report.folds.push_back(binary_metrics(test_y, predicted));
  }
  for (auto& m : report.folds) {
    report.mean.precision += m.precision / k;
    report.mean.recall += m.recall / k;
    report.mean.f1 += m.f1 / k;
    report.mean.tp += m.tp;
    report.mean.fp += m.fp;
    report.mean.tn += m.tn;
    report.mean.fn += m.fn;
  }
  return report;
}

json eval_report_to_json(const EvalReport& r) {
  auto metrics = [](const Metrics& m) {
    return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                {"tp", m.tp},               {"fp", m.fp},         {"tn", m.tn},
                {"fn", m.fn}};
  };
  json folds = json::array();
  for (auto& m : r.folds) folds.push_back(metrics(m));
  return json{{"threshold", r.threshold}, {"folds", folds}, {"mean", metrics(r.mean)}};
}

}  // namespace scamrank
