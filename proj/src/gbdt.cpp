#include "scamrank/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace scamrank {

using nlohmann::json;

void GbdtConfig::validate() const {
  if (rounds < 1) throw GbdtError("rounds must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw GbdtError("learning_rate must be in (0, 1]");
  if (max_depth < 0) throw GbdtError("max_depth must be >= 0");
  if (min_leaf < 1) throw GbdtError("min_leaf must be >= 1");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double point_loss(GbdtLoss loss, double raw, double y) {
  if (loss == GbdtLoss::Logistic) return softplus(raw) - y * raw;
  double d = raw - y;
  return 0.5 * d * d;
}

struct Split {
  bool found = false;
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  int category = 0;
  bool categorical = false;
  bool missing_left = true;
};

class TreeBuilder {
 public:
  TreeBuilder(const DesignMatrix& m, const std::vector<FeatureKind>& kinds, const GbdtConfig& cfg,
              std::span<const double> targets, std::span<const double> raw, std::span<const double> residual)
      : m_(m), kinds_(kinds), cfg_(cfg), targets_(targets), raw_(raw), residual_(residual) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(rows), 0);
    return tree;
  }

 private:
  // Variance reduction of the residuals: S_L^2/n_L + S_R^2/n_R - S^2/n.
  static double gain_of(double sl, double nl, double sr, double nr) {
    double s = sl + sr, n = nl + nr;
    return sl * sl / nl + sr * sr / nr - s * s / n;
  }

  Split best_split(const std::vector<std::size_t>& rows) const {
    Split best;
    const double min_leaf = cfg_.min_leaf;
    const double total_n = static_cast<double>(rows.size());
    double total_s = 0.0;
    for (auto r : rows) total_s += residual_[r];

    std::vector<std::pair<double, double>> present;  // (value, residual)
    present.reserve(rows.size());
    for (std::size_t c = 0; c < m_.cols; ++c) {
      if (kinds_[c] == FeatureKind::Categorical) {
        // One-vs-rest over the codes present in this node.
        std::map<int, std::pair<double, double>> stats;  // code -> (count, residual sum)
        for (auto r : rows) {
          auto& s = stats[static_cast<int>(m_.at(r, c))];
          s.first += 1.0;
          s.second += residual_[r];
        }
        if (stats.size() < 2) continue;
        for (auto& [code, ns] : stats) {
          double nl = ns.first, sl = ns.second;
          double nr = total_n - nl, sr = total_s - sl;
          if (nl < min_leaf || nr < min_leaf) continue;
          double g = gain_of(sl, nl, sr, nr);
          if (g > best.gain + 1e-12) {
            best = Split{true, g, static_cast<int>(c), 0.0, code, true, false};
          }
        }
        continue;
      }
      present.clear();
      double miss_n = 0.0, miss_s = 0.0;
      for (auto r : rows) {
        if (m_.is_missing(r, c)) {
          miss_n += 1.0;
          miss_s += residual_[r];
        } else {
          present.emplace_back(m_.at(r, c), residual_[r]);
        }
      }
      if (present.size() < 2) continue;
      std::sort(present.begin(), present.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double pl_n = 0.0, pl_s = 0.0;
      const double present_n = static_cast<double>(present.size());
      const double present_s = total_s - miss_s;
      for (std::size_t i = 0; i + 1 < present.size(); ++i) {
        pl_n += 1.0;
        pl_s += present[i].second;
        if (present[i].first == present[i + 1].first) continue;
        double thr = present[i].first + (present[i + 1].first - present[i].first) / 2.0;
        if (!(thr > present[i].first && thr <= present[i + 1].first)) thr = present[i].first;
        for (bool miss_left : {true, false}) {
          if (miss_n == 0.0 && !miss_left) continue;
          double nl = pl_n + (miss_left ? miss_n : 0.0);
          double sl = pl_s + (miss_left ? miss_s : 0.0);
          double nr = (present_n - pl_n) + (miss_left ? 0.0 : miss_n);
          double sr = (present_s - pl_s) + (miss_left ? 0.0 : miss_s);
          if (nl < min_leaf || nr < min_leaf) continue;
          double g = gain_of(sl, nl, sr, nr);
          if (g > best.gain + 1e-12) best = Split{true, g, static_cast<int>(c), thr, 0, false, miss_left};
        }
      }
    }
    return best;
  }

  bool goes_left(const Split& s, std::size_t r) const {
    if (s.categorical) return static_cast<int>(m_.at(r, s.feature)) == s.category;
    if (m_.is_missing(r, s.feature)) return s.missing_left;
    return m_.at(r, s.feature) <= s.threshold;
  }

  double leaf_value(const std::vector<std::size_t>& rows) const {
    double s = 0.0;
    for (auto r : rows) s += residual_[r];
    if (cfg_.loss == GbdtLoss::SquaredError) return s / static_cast<double>(rows.size());
    // One Newton step on the leaf's logistic loss, damped until the shrunk
    // update does not increase that loss.
    double h = 0.0;
    for (auto r : rows) {
      double p = sigmoid(raw_[r]);
      h += p * (1.0 - p);
    }
    double v = s / std::max(h, 1e-12);
    auto leaf_loss = [&](double delta) {
      double l = 0.0;
      for (auto r : rows) l += point_loss(GbdtLoss::Logistic, raw_[r] + delta, targets_[r]);
      return l;
    };
    const double base = leaf_loss(0.0);
    for (int k = 0; k < 60; ++k) {
      if (leaf_loss(cfg_.learning_rate * v) <= base) return v;
      v /= 2.0;
    }
    return 0.0;
  }

  void grow(Tree& tree, std::size_t node, std::vector<std::size_t> rows, int depth) {
    Split split;
    if (depth < cfg_.max_depth && rows.size() >= 2 * static_cast<std::size_t>(cfg_.min_leaf))
      split = best_split(rows);
    if (!split.found) {
      tree.nodes[node].value = leaf_value(rows);
      return;
    }
    std::vector<std::size_t> left, right;
    for (auto r : rows) (goes_left(split, r) ? left : right).push_back(r);
    TreeNode& n = tree.nodes[node];
    n.feature = split.feature;
    n.threshold = split.threshold;
    if (split.categorical) n.categories = {split.category};
    n.missing_left = split.missing_left;
    int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].left = li;
    tree.nodes[node].right = ri;
    grow(tree, static_cast<std::size_t>(li), std::move(left), depth + 1);
    grow(tree, static_cast<std::size_t>(ri), std::move(right), depth + 1);
  }

  const DesignMatrix& m_;
  const std::vector<FeatureKind>& kinds_;
  const GbdtConfig& cfg_;
  std::span<const double> targets_;
  std::span<const double> raw_;
  std::span<const double> residual_;
};

}  // namespace

double mean_loss(GbdtLoss loss, std::span<const double> raw, std::span<const double> targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) s += point_loss(loss, raw[i], targets[i]);
  return raw.empty() ? 0.0 : s / static_cast<double>(raw.size());
}

double Tree::evaluate(std::span<const double> values, std::span<const std::uint8_t> missing) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    const auto f = static_cast<std::size_t>(n.feature);
    bool left;
    if (!n.categories.empty())
      left = std::find(n.categories.begin(), n.categories.end(), static_cast<int>(values[f])) != n.categories.end();
    else if (missing[f])
      left = n.missing_left;
    else
      left = values[f] <= n.threshold;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[i].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

double GbdtModel::raw_score(std::span<const double> values, std::span<const std::uint8_t> missing) const {
  double s = 0.0;
  for (auto& t : trees) s += t.evaluate(values, missing);
  return base_score + config.learning_rate * s;
}

double GbdtModel::predict(std::span<const double> values, std::span<const std::uint8_t> missing) const {
  double raw = raw_score(values, missing);
  return config.loss == GbdtLoss::Logistic ? sigmoid(raw) : raw;
}

GbdtModel train_gbdt(const DesignMatrix& matrix, std::span<const double> targets, const GbdtConfig& config,
                     std::vector<double>* loss_trace) {
  config.validate();
  if (targets.size() != matrix.rows) throw GbdtError("target count does not match matrix rows");
  if (matrix.rows == 0) throw GbdtError("empty training set");

  GbdtModel model;
  model.config = config;
  model.schema_version = std::string(kSchemaVersion);
  for (auto& c : matrix.encoding.columns) model.column_kinds.push_back(c.kind);
  if (model.column_kinds.size() != matrix.cols) model.column_kinds.assign(matrix.cols, FeatureKind::Numeric);

  const double n = static_cast<double>(matrix.rows);
  if (config.loss == GbdtLoss::Logistic) {
    std::size_t pos = 0;
    for (double y : targets) {
      if (y != 0.0 && y != 1.0) throw GbdtError("logistic loss needs 0/1 labels");
      pos += y == 1.0;
    }
    if (pos == 0 || pos == matrix.rows) throw GbdtError("cannot fit prior: labels contain a single class");
    double p = static_cast<double>(pos) / n;
    model.base_score = std::log(p / (1.0 - p));
  } else {
    model.base_score = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  }

  std::vector<double> raw(matrix.rows, model.base_score);
  std::vector<double> residual(matrix.rows);
  std::vector<std::size_t> all(matrix.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(mean_loss(config.loss, raw, targets));
  }

  for (int round = 0; round < config.rounds; ++round) {
    for (std::size_t r = 0; r < matrix.rows; ++r)
      residual[r] = targets[r] - (config.loss == GbdtLoss::Logistic ? sigmoid(raw[r]) : raw[r]);
    TreeBuilder builder(matrix, model.column_kinds, config, targets, raw, residual);
    Tree tree = builder.build(all);
    for (std::size_t r = 0; r < matrix.rows; ++r)
      raw[r] += config.learning_rate * tree.evaluate(matrix.row(r), matrix.row_missing(r));
    model.trees.push_back(std::move(tree));
    if (loss_trace) loss_trace->push_back(mean_loss(config.loss, raw, targets));
  }
  return model;
}

json gbdt_to_json(const GbdtModel& m) {
  json trees = json::array();
  for (auto& t : m.trees) {
    json nodes = json::array();
    for (auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"value", n.value}});
      } else {
        json jn{{"feature", n.feature}, {"missing_left", n.missing_left}, {"left", n.left}, {"right", n.right}};
        if (n.categories.empty()) jn["threshold"] = n.threshold;
        else jn["categories"] = n.categories;
        nodes.push_back(std::move(jn));
      }
    }
    trees.push_back(std::move(nodes));
  }
  json kinds = json::array();
  for (auto k : m.column_kinds) kinds.push_back(to_string(k));
  return json{{"format", "scamrank-gbdt/1"},
              {"schema_version", m.schema_version},
              {"base_score", m.base_score},
              {"config",
               {{"rounds", m.config.rounds},
                {"max_depth", m.config.max_depth},
                {"learning_rate", m.config.learning_rate},
                {"min_leaf", m.config.min_leaf},
                {"loss", m.config.loss == GbdtLoss::Logistic ? "logistic" : "squared_error"},
                {"seed", m.config.seed}}},
              {"column_kinds", kinds},
              {"trees", trees}};
}

GbdtModel gbdt_from_json(const json& j) {
  if (j.value("format", "") != "scamrank-gbdt/1") throw SchemaError("not a scamrank-gbdt/1 model");
  GbdtModel m;
  m.schema_version = j.at("schema_version").get<std::string>();
  m.base_score = j.at("base_score").get<double>();
  const auto& c = j.at("config");
  m.config.rounds = c.at("rounds").get<int>();
  m.config.max_depth = c.at("max_depth").get<int>();
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.min_leaf = c.at("min_leaf").get<int>();
  m.config.loss = c.at("loss").get<std::string>() == "logistic" ? GbdtLoss::Logistic : GbdtLoss::SquaredError;
  m.config.seed = c.at("seed").get<std::uint64_t>();
  for (auto& k : j.at("column_kinds")) {
    auto s = k.get<std::string>();
    m.column_kinds.push_back(s == "C" ? FeatureKind::Categorical : s == "B" ? FeatureKind::Boolean : FeatureKind::Numeric);
  }
  for (auto& jt : j.at("trees")) {
    Tree t;
    for (auto& jn : jt) {
      TreeNode n;
      if (jn.contains("value")) {
        n.value = jn.at("value").get<double>();
      } else {
        n.feature = jn.at("feature").get<int>();
        n.missing_left = jn.at("missing_left").get<bool>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        if (jn.contains("threshold")) n.threshold = jn.at("threshold").get<double>();
        else n.categories = jn.at("categories").get<std::vector<int>>();
        if (!std::isfinite(n.threshold)) throw SchemaError("non-finite threshold");
      }
      t.nodes.push_back(std::move(n));
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace scamrank
