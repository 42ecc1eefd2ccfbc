#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "scamrank/branded.hpp"
#include "scamrank/discovery.hpp"
#include "scamrank/featurizer.hpp"
#include "scamrank/heuristics.hpp"
#include "scamrank/lupi.hpp"
#include "scamrank/oracle.hpp"
#include "scamrank/public_suffix.hpp"
#include "scamrank/synth.hpp"
#include "scamrank/toxicity.hpp"

namespace fs = std::filesystem;
using namespace scamrank;

namespace {

VerdictMap verdicts_from_labels(const fs::path& path) {
  VerdictMap v;
  for (auto& l : read_labels(path)) v[l.root_domain] = l.label;
  return v;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else write_file(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scam-website discovery through search-engine keyword ranking"};
  app.require_subcommand(1);
  std::string data;
  app.add_option("--data-dir", data, "Directory with bundled config files");

  // featurize
  std::string snaps_path, features_out = "-";
  auto* featurize = app.add_subcommand("featurize", "Extract oracle features from snapshots");
  featurize->add_option("--snapshots", snaps_path)->required();
  featurize->add_option("--out", features_out);

  // train-oracle
  std::string features_path, labels_path, model_out, classifier = "gbdt";
  GbdtConfig gbdt;
  int cv_folds = 0;
  auto* train_oracle_cmd = app.add_subcommand("train-oracle", "Train the scam classifier");
  train_oracle_cmd->add_option("--features", features_path)->required();
  train_oracle_cmd->add_option("--labels", labels_path)->required();
  train_oracle_cmd->add_option("--out", model_out)->required();
  train_oracle_cmd->add_option("--rounds", gbdt.rounds);
  train_oracle_cmd->add_option("--max-depth", gbdt.max_depth);
  train_oracle_cmd->add_option("--learning-rate", gbdt.learning_rate);
  train_oracle_cmd->add_option("--seed", gbdt.seed);
  train_oracle_cmd->add_option("--cv", cv_folds, "Also print k-fold CV metrics as JSON");
  train_oracle_cmd->add_option("--cv-classifier", classifier)->check(CLI::IsMember({"gbdt", "logreg"}));

  // score
  std::string model_path, scores_out = "-";
  auto* score = app.add_subcommand("score", "Score feature rows with a trained oracle");
  score->add_option("--model", model_path)->required();
  score->add_option("--features", features_path)->required();
  score->add_option("--out", scores_out);

  // toxicity
  std::string serps_path, keywords_path, tox_out = "-";
  auto* toxicity = app.add_subcommand("toxicity", "Per-query toxicity and expansion from SERPs and verdicts");
  toxicity->add_option("--serps", serps_path)->required();
  toxicity->add_option("--labels", labels_path, "root_domain,label,category verdicts")->required();
  toxicity->add_option("--keywords", keywords_path, "Keyword suggestions giving each query's category");
  toxicity->add_option("--out", tox_out);

  // baselines
  std::string tox_path, segments_path, out_dir, intents_path;
  std::uint64_t seed = 7;
  std::size_t top_k = 20;
  auto* baselines = app.add_subcommand("baselines", "Attribute, segment and cross-category baseline tables");
  baselines->add_option("--keywords", keywords_path)->required();
  baselines->add_option("--toxicity", tox_path)->required();
  baselines->add_option("--segments", segments_path)->required();
  baselines->add_option("--intents", intents_path, "Annotated intents JSONL (lexicon fallback)");
  baselines->add_option("--k", top_k);
  baselines->add_option("--seed", seed);
  baselines->add_option("--out-dir", out_dir)->required();

  // filter-branded
  std::string in_path, filtered_out;
  auto* filter = app.add_subcommand("filter-branded", "Drop branded keywords");
  filter->add_option("--in", in_path)->required();
  filter->add_option("--out", filtered_out)->required();

  // train-lupi
  std::string train_path, priv = "google:description:scam_only:ranked:20", weights = "1,0.5,0.5,0.5";
  std::string lupi_out = ".";
  LupiTrainConfig lupi_cfg;
  EncoderConfig enc;
  double val_fraction = 0.1;
  auto* train_lupi = app.add_subcommand("train-lupi", "Train teacher and distilled student");
  train_lupi->add_option("--train", train_path)->required();
  train_lupi->add_option("--labels", labels_path, "Verdicts for privileged-text filtering")->required();
  train_lupi->add_option("--priv", priv);
  train_lupi->add_option("--weights", weights);
  train_lupi->add_option("--seed", lupi_cfg.seed);
  train_lupi->add_option("--lr", lupi_cfg.lr);
  train_lupi->add_option("--epochs", lupi_cfg.epochs);
  train_lupi->add_option("--batch", lupi_cfg.batch_size);
  train_lupi->add_option("--patience", lupi_cfg.patience);
  train_lupi->add_option("--layers", enc.layers);
  train_lupi->add_option("--dim", enc.dim);
  train_lupi->add_option("--heads", enc.heads);
  train_lupi->add_option("--ff", enc.ff_dim);
  train_lupi->add_option("--validation", val_fraction);
  train_lupi->add_option("--out-dir", lupi_out);

  // rank
  std::string ranked_out = "-";
  std::size_t rank_k = 20;
  auto* rank = app.add_subcommand("rank", "Rank candidate keywords with a student model");
  rank->add_option("--model", model_path)->required();
  rank->add_option("--keywords", keywords_path)->required();
  rank->add_option("--k", rank_k);
  rank->add_option("--out", ranked_out);

  // discover
  std::string ranked_path, mode = "replay", store_path, report_out, format = "csv", capture_date;
  std::vector<std::string> engines{"google"};
  int exposure_k = 20;
  auto* discover = app.add_subcommand("discover", "Fetch SERPs for ranked keywords and report new scam sites");
  discover->add_option("--ranked", ranked_path)->required();
  discover->add_option("--mode", mode)->check(CLI::IsMember({"replay", "live"}));
  discover->add_option("--oracle", model_path)->required();
  discover->add_option("--store", store_path, "SERP fixture store (JSONL)")->required();
  discover->add_option("--snapshots", snaps_path)->required();
  discover->add_option("--labels", labels_path, "Seed labels excluded from discovery")->required();
  discover->add_option("--engines", engines)->delimiter(',');
  discover->add_option("--capture-date", capture_date);
  discover->add_option("--exposure-k", exposure_k);
  discover->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  discover->add_option("--out", report_out)->required();

  // schema
  std::string schema_out = "-";
  auto* schema = app.add_subcommand("schema", "Print the versioned oracle feature schema");
  schema->add_option("--out", schema_out);

  // make-fixtures
  FixturePackConfig pack;
  std::string pack_dir;
  auto* make_fixtures = app.add_subcommand("make-fixtures", "Regenerate the synthetic fixture pack");
  make_fixtures->add_option("--out-dir", pack_dir)->required();
  make_fixtures->add_option("--seed", pack.seed);
  make_fixtures->add_option("--queries", pack.queries_per_category);
  make_fixtures->add_option("--categories", pack.categories);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!data.empty()) set_data_dir(data);

    if (*featurize) {
      FeatureTable table;
      const auto& psl = PublicSuffixList::bundled();
      for (auto& s : read_snapshots(snaps_path)) {
        table.keys.push_back(psl.root_domain(s.url));
        table.vectors.push_back(Featurizer::bundled().extract(s));
      }
      emit(features_out, features_to_csv(table));
    } else if (*train_oracle_cmd) {
      auto table = features_from_csv(read_file(features_path));
      std::map<std::string, Label> by_domain;
      for (auto& l : read_labels(labels_path)) by_domain[l.root_domain] = l.label;
      std::vector<FeatureVector> x;
      std::vector<int> y;
      for (std::size_t i = 0; i < table.keys.size(); ++i) {
        auto it = by_domain.find(table.keys[i]);
        if (it == by_domain.end()) continue;
        x.push_back(table.vectors[i]);
        y.push_back(it->second == Label::Scam);
      }
      if (x.empty()) throw Error("no labeled feature rows");
      if (cv_folds > 0) {
        auto kind = classifier == "gbdt" ? ClassifierKind::Gbdt : ClassifierKind::LogisticRegression;
        std::cout << eval_report_to_json(evaluate_cv(x, y, cv_folds, gbdt, oracle_schema(), kind, gbdt.seed)).dump(2)
                  << "\n";
      }
      train_oracle(x, y, gbdt, oracle_schema()).save(model_out);
    } else if (*score) {
      auto model = OracleModel::load(model_path);
      auto table = features_from_csv(read_file(features_path));
      std::string out = "root_domain,probability,label\n";
      for (std::size_t i = 0; i < table.keys.size(); ++i) {
        auto v = model.predict(table.vectors[i]);
        out += csv_escape(table.keys[i]) + "," + format_double(v.probability) + "," +
               std::string(to_string(v.label)) + "\n";
      }
      emit(scores_out, out);
    } else if (*toxicity) {
      auto verdicts = verdicts_from_labels(labels_path);
      std::map<std::string, std::string> category;
      if (!keywords_path.empty())
        for (auto& k : read_keywords(keywords_path)) category[k.text] = k.category;
      std::vector<QueryToxicity> rows;
      for (auto& serp : read_serps(serps_path)) {
        fill_root_domains(serp, PublicSuffixList::bundled());
        rows.push_back(score_serp(serp, verdicts, category.count(serp.query) ? category[serp.query] : ""));
      }
      emit(tox_out, toxicity_to_csv(rows));
    } else if (*baselines) {
      auto keywords = read_keywords(keywords_path);
      ScoredByCategory scored;
      for (auto& q : toxicity_from_csv(read_file(tox_path))) scored[q.category].push_back(q);
      SegmentsByCategory segs;
      for (auto& r : read_segments(segments_path)) segs[r.category].push_back(r.segment);
      const IntentAdapter* intents = &LexiconIntentClassifier::bundled();
      std::optional<AnnotatedIntentClassifier> annotated;
      if (!intents_path.empty()) {
        annotated = AnnotatedIntentClassifier::from_file(intents_path, LexiconIntentClassifier::bundled());
        intents = &*annotated;
      }
      fs::create_directories(out_dir);
      auto attrs = attribute_table(keywords, scored, *intents, seed, top_k);
      write_file(fs::path(out_dir) / "attributes.csv", baseline_table_to_csv(attrs));
      auto seg_rows = segment_table(segs, scored, seed);
      write_file(fs::path(out_dir) / "segments.csv", baseline_table_to_csv(seg_rows));
      write_file(fs::path(out_dir) / "cross_category.csv", cross_matrix_to_csv(cross_category_matrix(segs, scored, seed)));
    } else if (*filter) {
      auto keywords = read_keywords(in_path);
      const auto& lexicon = BrandLexicon::bundled();
      std::vector<KeywordSuggestion> kept;
      for (auto& k : keywords)
        if (!classify_branded(k.text, lexicon).branded) kept.push_back(k);
      write_keywords(filtered_out, kept);
      std::cerr << "kept " << kept.size() << " of " << keywords.size() << " keywords\n";
    } else if (*train_lupi) {
      auto examples = read_lupi_examples(train_path);
      auto verdicts = verdicts_from_labels(labels_path);
      auto w = parse_weights(weights);
      TokenizerConfig tok;
      auto split = split_validation(examples, val_fraction, lupi_cfg.seed);
      auto teacher = train_teacher(TeacherModel::init(tok, enc, parse_privileged(priv), lupi_cfg.seed), split.train,
                                   split.validation, verdicts, lupi_cfg);
      auto student = distill_student(teacher, w, split.train, split.validation, verdicts, lupi_cfg);
      fs::create_directories(lupi_out);
      save_json(fs::path(lupi_out) / "teacher.json", teacher_to_json(teacher));
      save_json(fs::path(lupi_out) / "student.json", student_to_json(student));
      save_json(fs::path(lupi_out) / "train_config.json", train_config_to_json(lupi_cfg));
      std::cerr << "validation MAE teacher " << mae_teacher(teacher, split.validation, verdicts) << ", student "
                << mae_student(student, split.validation) << "\n";
    } else if (*rank) {
      auto student = student_from_json(load_json(model_path));
      auto keywords = read_keywords(keywords_path);
      emit(ranked_out, ranked_to_csv(rank_keywords(student, keywords, rank_k)));
    } else if (*discover) {
      auto ranked = ranked_from_csv(read_file(ranked_path));
      auto oracle = OracleModel::load(model_path);
      FixtureStore store(store_path);
      std::unique_ptr<SerpTransport> transport;
      auto fetch_mode = parse_fetch_mode(mode);
      if (fetch_mode == FetchMode::Live) transport = make_dataforseo_transport();
      SerpFetcher fetcher(fetch_mode, store, transport.get(), {}, capture_date);
      const auto& psl = PublicSuffixList::bundled();
      auto snaps = read_snapshots(snaps_path);
      SnapshotIndex index(snaps, psl);
      std::set<std::string> seed_domains;
      for (auto& l : read_labels(labels_path)) seed_domains.insert(l.root_domain);
      DiscoveryConfig cfg;
      cfg.engines.clear();
      for (auto& e : engines) cfg.engines.push_back(parse_engine(e));
      cfg.exposure_k = exposure_k;
      auto report = run_discovery(ranked, fetcher, oracle, Featurizer::bundled(), index, seed_domains,
                                  ParkedDetector::bundled(), psl, cfg);
      emit_report(report, format == "csv" ? ReportFormat::Csv : ReportFormat::Json, report_out);
    } else if (*schema) {
      emit(schema_out, schema_to_json(oracle_schema()).dump(2) + "\n");
    } else if (*make_fixtures) {
      write_fixture_pack(pack_dir, pack);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
