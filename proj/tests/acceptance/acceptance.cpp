// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "../lupi_testing.hpp"
#include "../pack_tally.hpp"
#include "scamrank/branded.hpp"
#include "scamrank/discovery.hpp"
#include "scamrank/heuristics.hpp"
#include "scamrank/oracle.hpp"
#include "scamrank/synth.hpp"
#include "scamrank/toxicity.hpp"

using namespace scamrank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

// 1. Analytic gradients of each loss term and the weighted sum against
// central differences with step 1e-3, eval mode, 20 random tiny configs. The
// gate uses the Richardson-extrapolated difference; the plain one is reported.
Outcome gradients() {
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<LossWeights> terms{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {}};
  double worst = 0.0, worst_entry = 0.0, worst_plain = 0.0;
  std::string where;
  int resampled = 0;
  std::uint64_t seed = 1000;
  for (int config = 0; config < 20; ++config, ++seed) {
    // Configs with a ReLU input or MAE residual within 1e-2 of its kink are
    // redrawn: a difference quotient straddling a kink is not a derivative.
    auto margin = [&](std::uint64_t s) {
      auto setup = fixtures::make_tiny_setup(s);
      double m = 1e9;
      for (auto& w : terms) m = std::min(m, fixtures::kink_margin(setup, w));
      return m;
    };
    while (margin(seed) < 1e-2) {
      seed += 10000;
      ++resampled;
    }
    for (auto& w : terms) {
      auto setup = fixtures::make_tiny_setup(seed);
      auto r = fixtures::check_gradients(setup, w, 1e-3, 1e-6, true);
      auto plain_setup = fixtures::make_tiny_setup(seed);
      worst_plain = std::max(worst_plain, fixtures::check_gradients(plain_setup, w, 1e-3).tensor_rel_error);
      worst_entry = std::max(worst_entry, r.max_rel_error);
      if (r.tensor_rel_error > worst) {
        worst = r.tensor_rel_error;
        where = "seed " + std::to_string(seed) + " " + r.worst_tensor;
      }
    }
  }
  double t = seconds_since(t0);
  bool pass = worst <= 1e-4 && t < 60.0;
  return {pass, "max per-tensor relative error " + fmt(worst) + " (" + where + "; worst single entry " +
                    fmt(worst_entry) + "; plain central difference " + fmt(worst_plain) + "), " +
                    std::to_string(resampled) + " configs redrawn near kinks, " +
                    fmt(t, 3) + " s"};
}

// 2. Leave-one-category-out on the synthetic privileged-information corpus.
Outcome lupi_ordering() {
  auto t0 = std::chrono::steady_clock::now();
  auto corpus = make_lupi_corpus({5, 420, 10, 0.5, 7});
  LocoConfig cfg;
  cfg.encoder.dim = 32;
  cfg.encoder.ff_dim = 64;
  cfg.teacher_train.lr = 3e-3;
  cfg.teacher_train.epochs = 15;
  cfg.teacher_train.batch_size = 16;
  cfg.teacher_train.patience = 5;
  cfg.student_train = cfg.teacher_train;
  cfg.seed = 1;
  int teacher_ge = 0, student_gt = 0, folds = 0;
  double ms = 0, mb = 0, mt = 0;
  std::string per_fold;
  loco_cv(corpus.examples, corpus.categories, cfg, corpus.verdicts, [&](const FoldReport& f) {
    if (f.skipped) return;
    ++folds;
    teacher_ge += f.teacher.toxicity >= f.student.toxicity;
    student_gt += f.student.toxicity > f.baseline.toxicity;
    mt += f.teacher.toxicity;
    ms += f.student.toxicity;
    mb += f.baseline.toxicity;
    per_fold += " " + f.category + "=" + fmt(f.teacher.toxicity, 3) + "/" + fmt(f.student.toxicity, 3) + "/" +
                fmt(f.baseline.toxicity, 3);
    std::cout << "    fold " << f.category << ": max " << fmt(f.max.toxicity, 3) << ", teacher "
              << fmt(f.teacher.toxicity, 3) << ", student " << fmt(f.student.toxicity, 3) << ", baseline "
              << fmt(f.baseline.toxicity, 3) << " (" << fmt(seconds_since(t0), 3) << " s)" << std::endl;
  });
  double t = seconds_since(t0);
  bool pass = folds == 5 && teacher_ge >= 4 && student_gt >= 4 && ms > mb && t < 900.0;
  return {pass, std::to_string(corpus.examples.size()) + " queries; teacher>=student in " + std::to_string(teacher_ge) +
                    "/5, student>baseline in " + std::to_string(student_gt) + "/5; mean top-20 toxicity teacher " +
                    fmt(mt / folds, 3) + ", student " + fmt(ms / folds, 3) + ", baseline " + fmt(mb / folds, 3) +
                    "; " + fmt(t, 3) + " s"};
}

// 3. Oracle cross-validation on a separable synthetic feature set, plus the
// released corpus when one is provided.
Outcome oracle_quality() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& schema = oracle_schema();
  std::size_t age = 0;
  while (schema[age].name != "domain_age") ++age;
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 200; ++i) {
    FeatureVector v;
    for (auto& f : schema) {
      if (f.kind == FeatureKind::Categorical) v.values.emplace_back(std::string(u(rng) < 0.5 ? "x" : "y"));
      else if (f.kind == FeatureKind::Boolean) v.values.emplace_back(u(rng) < 0.5 ? 1.0 : 0.0);
      else v.values.emplace_back(u(rng) * 100.0);
    }
    int y = i % 2;
    v.values[age] = y ? 5.0 + u(rng) * 80.0 : 400.0 + u(rng) * 3000.0;
    xs.push_back(std::move(v));
    ys.push_back(y);
  }
  // Separability: some feature's class ranges do not overlap.
  bool separable = false;
  for (std::size_t f = 0; f < schema.size() && !separable; ++f) {
    if (schema[f].kind == FeatureKind::Categorical) continue;
    double max0 = -1e300, min0 = 1e300, max1 = -1e300, min1 = 1e300;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double x = std::get<double>(xs[i].values[f]);
      (ys[i] ? max1 : max0) = std::max(ys[i] ? max1 : max0, x);
      (ys[i] ? min1 : min0) = std::min(ys[i] ? min1 : min0, x);
    }
    separable = max1 < min0 || max0 < min1;
  }
  auto report = evaluate_cv(xs, ys, 5, GbdtConfig{}, schema, ClassifierKind::Gbdt, 3);
  bool perfect = true;
  for (auto& m : report.folds) perfect = perfect && m.f1 == 1.0;
  std::string detail = std::string("synthetic set ") + (separable ? "separable" : "NOT separable") +
                       ", 5-fold F1 per fold all 1.0: " + (perfect ? "yes" : "no");
  bool pass = separable && perfect;

  const char* released = std::getenv("SCAMRANK_RELEASED_CORPUS");
  if (released && *released) {
    fs::path dir(released);
    auto table = features_from_csv(read_file(dir / "features.csv"));
    std::map<std::string, Label> labels;
    for (auto& l : read_labels(dir / "labels.csv")) labels[l.root_domain] = l.label;
    std::vector<FeatureVector> rx;
    std::vector<int> ry;
    for (std::size_t i = 0; i < table.keys.size(); ++i)
      if (auto it = labels.find(table.keys[i]); it != labels.end()) {
        rx.push_back(table.vectors[i]);
        ry.push_back(it->second == Label::Scam);
      }
    double g = evaluate_cv(rx, ry, 5, GbdtConfig{}, oracle_schema(), ClassifierKind::Gbdt, 0).mean.f1;
    double l = evaluate_cv(rx, ry, 5, GbdtConfig{}, oracle_schema(), ClassifierKind::LogisticRegression, 0).mean.f1;
    detail += "; released corpus GBDT F1 " + fmt(g) + " vs logistic regression " + fmt(l);
    pass = pass && g > l;
  } else {
    detail += "; released-corpus ordering NOT RUN (set SCAMRANK_RELEASED_CORPUS to a directory with features.csv "
              "and labels.csv)";
  }
  return {pass, detail};
}

// 4. score_serp against a set-based dedup-and-count oracle.
Outcome toxicity_identities() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int pool = 1 + static_cast<int>(rng() % 50);
    VerdictMap v;
    for (int i = 0; i < pool; ++i) v["s" + std::to_string(i) + ".net"] = rng() % 4 == 0 ? Label::Scam : Label::Benign;
    SerpResultSet s;
    s.query = "q" + std::to_string(trial);
    int n = 1 + static_cast<int>(rng() % 40);
    std::set<std::string> distinct, scams;
    for (int r = 1; r <= n; ++r) {
      auto d = "s" + std::to_string(rng() % pool) + ".net";
      s.entries.push_back({static_cast<Engine>(rng() % 4), r, "https://www." + d + "/p", d, "", ""});
      distinct.insert(d);
      if (v[d] == Label::Scam) scams.insert(d);
    }
    auto q = score_serp(s, v);
    mismatches += q.total_sites != static_cast<int>(distinct.size()) || q.expansion != static_cast<int>(scams.size()) ||
                  q.toxicity != static_cast<double>(scams.size()) / static_cast<double>(distinct.size());
  }
  SerpResultSet example;
  VerdictMap v;
  for (int i = 0; i < 20; ++i) {
    auto d = "site" + std::to_string(i) + ".com";
    example.entries.push_back({Engine::Google, i + 1, "https://" + d, d, "", ""});
    v[d] = i < 6 ? Label::Scam : Label::Benign;
  }
  auto q = score_serp(example, v);
  bool example_ok = q.toxicity == 0.3 && q.expansion == 6;
  return {mismatches == 0 && example_ok, std::to_string(mismatches) + " mismatches over 1000 random SERP sets; 6 of 20 " +
                                             "gives toxicity " + fmt(q.toxicity) + ", expansion " +
                                             std::to_string(q.expansion)};
}

// 5. Bootstrap estimator contracts.
Outcome bootstrap() {
  bool constant_ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<double> c(10 + seed, 0.37);
    auto e = bootstrap_estimate(c, 1000, 20, seed * 7919);
    constant_ok = constant_ok && e.mean == 0.37 && e.std == 0.0;
  }
  std::mt19937_64 rng(8);
  std::vector<double> scores;
  for (int i = 0; i < 1000; ++i) scores.push_back(static_cast<double>(rng() % 2));
  auto a = bootstrap_estimate(scores, 1000, 20, 99), b = bootstrap_estimate(scores, 1000, 20, 99);
  bool reproducible = a == b;
  std::vector<double> fair;
  for (int i = 0; i < 1000; ++i) fair.push_back(i % 2);
  auto e = bootstrap_estimate(fair, 1000, 20, 12345);
  double bound = 3 * 0.5 / std::sqrt(20000.0);
  bool within = std::abs(e.mean - 0.5) <= bound;
  return {constant_ok && reproducible && within,
          std::string("constant input exact: ") + (constant_ok ? "yes" : "no") + "; fixed seed bit-exact: " +
              (reproducible ? "yes" : "no") + "; Bernoulli(0.5) mean " + fmt(e.mean, 6) + " vs bound 0.5 +/- " +
              fmt(bound, 4)};
}

// 6. Diagonal dominance of the cross-category matrix on planted segments.
Outcome cross_category() {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> hi(0.5, 1.0), lo(0.0, 0.3);
  const std::vector<std::string> cats{"c1", "c2", "c3", "c4", "c5"};
  SegmentsByCategory segs;
  ScoredByCategory scored;
  for (auto& c : cats) {
    for (int k = 0; k < 3; ++k) segs[c].push_back({c + "tox" + std::to_string(k), TokenType::Modifier});
    segs[c].push_back({"buy", TokenType::Content});
    segs[c].push_back({"online", TokenType::Content});
    for (int i = 0; i < 60; ++i) {
      double t;
      std::string q;
      if (i % 3 == 0) {
        q = c + "tox" + std::to_string(i % 9 / 3) + " item" + std::to_string(i);
        t = hi(rng);
      } else if (i % 3 == 1) {
        q = (i % 2 ? "buy " : "online ") + std::string("item") + std::to_string(i);
        t = lo(rng);
      } else {
        q = "plain item" + std::to_string(i);
        t = hi(rng);
      }
      int total = 20, scams = static_cast<int>(std::lround(t * total));
      scored[c].push_back({q, c, total, scams, static_cast<double>(scams) / total, scams});
    }
  }
  // Exact (non-bootstrap) cell means, to confirm the construction.
  auto exact = [&](const std::string& s, const std::string& t) {
    double sum = 0;
    int n = 0;
    for (auto& q : scored[t]) {
      bool hit = false;
      for (auto& seg : segs[s]) hit = hit || match_segment(q.query, seg);
      if (hit) {
        sum += q.toxicity;
        ++n;
      }
    }
    return sum / n;
  };
  double min_gap = 1e9;
  for (auto& s : cats)
    for (auto& t : cats)
      if (s != t) min_gap = std::min(min_gap, exact(s, s) - exact(s, t));

  auto m = cross_category_matrix(segs, scored, 2024);
  int violations = 0;
  double smallest_margin = 1e9;
  for (std::size_t s = 0; s < cats.size(); ++s)
    for (std::size_t t = 0; t < cats.size(); ++t) {
      if (s == t) continue;
      double d = m.cells[s][s].toxicity->mean - m.cells[s][t].toxicity->mean;
      smallest_margin = std::min(smallest_margin, d);
      violations += !(d > 0);
    }
  return {violations == 0 && min_gap > 0,
          "exact in-category minus cross-category gap >= " + fmt(min_gap, 3) + "; bootstrap diagonal margin >= " +
              fmt(smallest_margin, 3) + "; " + std::to_string(violations) + " violations in 20 off-diagonal cells"};
}

// 7. Frozen teacher, shared initial backbone and baseline equivalence.
Outcome distillation_contracts() {
  auto corpus = make_lupi_corpus({3, 40, 10, 0.5, 17});
  auto split = split_validation(corpus.examples, 0.2, 4);
  EncoderConfig enc;
  enc.layers = 1;
  enc.dim = 16;
  enc.heads = 2;
  enc.ff_dim = 32;
  LupiTrainConfig cfg;
  cfg.lr = 3e-3;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.seed = 9;
  auto teacher = train_teacher(TeacherModel::init({}, enc, {}, 9), split.train, split.validation, corpus.verdicts, cfg);
  std::vector<Mat> before;
  for (auto* p : teacher.params()) before.push_back(p->value);
  distill_student(teacher, {}, split.train, split.validation, corpus.verdicts, cfg);
  bool frozen = true;
  auto after = teacher.params();
  for (std::size_t i = 0; i < after.size(); ++i) frozen = frozen && after[i]->value == before[i];

  auto student = StudentModel::from_teacher(teacher, cfg.seed);
  bool same_backbone = true;
  auto tp = teacher.query_encoder.params(), sp = student.query_encoder.params();
  for (std::size_t i = 0; i < tp.size(); ++i) same_backbone = same_backbone && tp[i]->value == sp[i]->value;

  TrainTrace distilled, baseline;
  distill_student(teacher, {1, 0, 0, 0}, split.train, split.validation, corpus.verdicts, cfg, &distilled);
  train_baseline(StudentModel::from_teacher(teacher, cfg.seed), split.train, split.validation, cfg, &baseline);
  bool same_trajectory = !distilled.step_loss.empty() && distilled.step_loss == baseline.step_loss &&
                         distilled.step_checksum == baseline.step_checksum;
  return {frozen && same_backbone && same_trajectory,
          std::string("teacher bit-identical: ") + (frozen ? "yes" : "no") + "; step-0 backbone equal: " +
              (same_backbone ? "yes" : "no") + "; w=(1,0,0,0) trajectory equals baseline over " +
              std::to_string(distilled.step_loss.size()) + " steps: " + (same_trajectory ? "yes" : "no")};
}

// 8. Teacher permutation invariance and row-stochastic attention.
Outcome teacher_invariances() {
  TokenizerConfig tok;
  EncoderConfig enc;
  auto teacher = TeacherModel::init(tok, enc, {}, 31);
  const auto& t = bundled_tokenizer(tok);
  std::mt19937_64 rng(77);
  const std::vector<std::string> words{"cheap", "replica", "shoes", "limited", "deal", "bitcoin", "official", "store",
                                       "free", "shipping", "crazy", "giveaway", "order", "now", "pills", "xqz"};
  auto text = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    return s;
  };
  double worst_perm = 0.0, worst_row = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto q = t.encode_query(text(1 + static_cast<int>(rng() % 8)));
    std::vector<std::vector<int>> serp;
    for (int k = static_cast<int>(rng() % 6); k >= 0; --k) serp.push_back(t.encode_serp(text(3 + static_cast<int>(rng() % 20))));
    auto a = teacher_forward(teacher, q, serp);
    std::shuffle(serp.begin(), serp.end(), rng);
    auto b = teacher_forward(teacher, q, serp);
    worst_perm = std::max(worst_perm, std::abs(a.score - b.score));
    for (auto& layer : a.query_attention)
      for (auto& head : layer)
        for (Eigen::Index r = 0; r < head.rows(); ++r) worst_row = std::max(worst_row, std::abs(head.row(r).sum() - 1.0));
  }
  return {worst_perm <= 1e-6 && worst_row <= 1e-5,
          "max score change under SERP permutation " + fmt(worst_perm) + "; max |attention row sum - 1| " +
              fmt(worst_row) + " over 100 inputs"};
}

// 9. Rule-based branded filter on the labeled fixture.
Outcome branded() {
  auto data = read_brand_fixture(data_dir() / "fixtures" / "branded_labeled.tsv");
  auto m = evaluate_filter(data, BrandLexicon::bundled());
  return {data.size() == 200 && m.f1 >= 0.85, std::to_string(data.size()) + " samples; precision " + fmt(m.precision) +
                                                  ", recall " + fmt(m.recall) + ", F1 " + fmt(m.f1)};
}

// 10. `rank` + `discover --mode replay` through the CLI, twice.
Outcome replay_determinism() {
  const fs::path pack = data_dir() / "fixtures" / "pack";
  const fs::path work = fs::temp_directory_path() / ("scamrank_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cli = SCAMRANK_CLI;
  auto run = [&](const std::string& tag) {
    auto ranked = work / ("ranked_" + tag + ".csv");
    auto report = work / ("report_" + tag + ".csv");
    std::string rank_cmd = cli + " rank --model " + (pack / "student.json").string() + " --keywords " +
                           (pack / "keywords.jsonl").string() + " --k 10 --out " + ranked.string();
    std::string discover_cmd = cli + " discover --ranked " + ranked.string() + " --mode replay --oracle " +
                               (pack / "oracle.json").string() + " --store " + (pack / "serp_store.jsonl").string() +
                               " --snapshots " + (pack / "snapshots.jsonl").string() + " --labels " +
                               (pack / "labels.csv").string() + " --engines google,bing --out " + report.string();
    if (std::system(rank_cmd.c_str()) != 0 || std::system(discover_cmd.c_str()) != 0)
      throw Error("CLI invocation failed");
    return std::pair{read_file(ranked), read_file(report)};
  };
  auto [ranked1, report1] = run("a");
  auto [ranked2, report2] = run("b");
  bool identical = ranked1 == ranked2 && report1 == report2;

  std::vector<std::pair<std::string, std::string>> queries;
  for (auto& r : ranked_from_csv(ranked1)) queries.push_back({r.category, r.query});
  auto tally = fixtures::tally_pack(pack.string(), queries, {"google", "bing"});
  auto report = report_from_csv(report1);
  bool match = report.all.discovered_scams == tally.scams && report.all.total_sites == tally.total &&
               report.categories.size() == tally.per_category.size();
  for (auto& c : report.categories) {
    auto it = tally.per_category.find(c.category);
    match = match && it != tally.per_category.end() && it->second.first == c.discovered_scams &&
            it->second.second == c.total_sites;
  }
  fs::remove_all(work);
  return {identical && match, std::to_string(queries.size()) + " ranked queries; reports byte-identical: " +
                                  (identical ? "yes" : "no") + "; counts equal independent tally (" +
                                  std::to_string(tally.scams) + " scams of " + std::to_string(tally.total) +
                                  " sites): " + (match ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"LUPI ordering", lupi_ordering},
      {"oracle quality", oracle_quality},
      {"toxicity identities", toxicity_identities},
      {"bootstrap estimator", bootstrap},
      {"cross-category diagonal dominance", cross_category},
      {"distillation contracts", distillation_contracts},
      {"teacher invariances", teacher_invariances},
      {"branded filter", branded},
      {"end-to-end replay determinism", replay_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed ? 1 : 0;
}
