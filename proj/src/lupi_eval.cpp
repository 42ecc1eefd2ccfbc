#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "scamrank/lupi.hpp"

namespace scamrank {

using nlohmann::json;

double predict_teacher(const TeacherModel& m, const LupiExample& e, const VerdictMap& verdicts) {
  const auto& tok = bundled_tokenizer(m.tokenizer);
  std::vector<std::vector<int>> serp;
  for (auto& t : privileged_texts(e.serp, m.priv, verdicts)) serp.push_back(tok.encode_serp(t));
  return teacher_forward(m, tok.encode_query(e.query), serp).score;
}

double predict_student(const StudentModel& m, std::string_view query) {
  return student_forward(m, bundled_tokenizer(m.tokenizer).encode_query(query)).score;
}

double mae_teacher(const TeacherModel& m, std::span<const LupiExample> data, const VerdictMap& verdicts) {
  double s = 0.0;
  for (auto& e : data) s += std::abs(predict_teacher(m, e, verdicts) - e.toxicity);
  return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

double mae_student(const StudentModel& m, std::span<const LupiExample> data) {
  double s = 0.0;
  for (auto& e : data) s += std::abs(predict_student(m, e.query) - e.toxicity);
  return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

TopK top_k_by_score(std::span<const LupiExample> data, std::span<const double> scores, std::size_t k) {
  if (scores.size() != data.size()) throw Error("score count does not match example count");
  TopK out;
  if (data.empty() || k == 0) return out;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : data[a].query < data[b].query;
  });
  const std::size_t m = std::min(k, data.size());
  for (std::size_t i = 0; i < m; ++i) {
    out.toxicity += data[idx[i]].toxicity;
    out.expansion += data[idx[i]].expansion;
  }
  out.toxicity /= static_cast<double>(m);
  out.expansion /= static_cast<double>(m);
  return out;
}

GridResult grid_search_privileged(std::span<const LupiExample> data, const PrivilegedAxes& axes,
                                  const TokenizerConfig& tok, const EncoderConfig& enc, const LupiTrainConfig& cfg,
                                  const VerdictMap& verdicts, double validation_fraction) {
  if (axes.engines.empty() || axes.fields.empty() || axes.filters.empty() || axes.selections.empty() ||
      axes.sizes.empty())
    throw Error("every privileged axis needs at least one value");
  auto split = split_validation(data, validation_fraction, cfg.seed);
  GridResult out;
  for (auto e : axes.engines)
    for (auto f : axes.fields)
      for (auto fl : axes.filters)
        for (auto s : axes.selections)
          for (int n : axes.sizes) {
            PrivilegedConfig p{e, f, fl, s, n};
            auto teacher =
                train_teacher(TeacherModel::init(tok, enc, p, cfg.seed), split.train, split.validation, verdicts, cfg);
            const auto& eval = split.validation.empty() ? split.train : split.validation;
            out.table.push_back({p, mae_teacher(teacher, eval, verdicts)});
          }
  std::stable_sort(out.table.begin(), out.table.end(),
                   [](const GridRow& a, const GridRow& b) { return a.validation_mae < b.validation_mae; });
  out.best = out.table.front().priv;
  return out;
}

std::vector<LocoFold> loco_partition(std::span<const LupiExample> data, std::span<const std::string> categories) {
  std::vector<LocoFold> out;
  for (auto& cat : categories) {
    LocoFold f{cat, {}, {}};
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].category == cat ? f.test : f.rest).push_back(i);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FoldReport> loco_cv(std::span<const LupiExample> data, std::span<const std::string> categories,
                                const LocoConfig& cfg, const VerdictMap& verdicts, const FoldCallback& on_fold) {
  if (categories.size() < 2) throw Error("leave-one-category-out needs at least 2 categories");
  std::vector<FoldReport> out;
  for (auto& fold : loco_partition(data, categories)) {
    const auto& cat = fold.category;
    FoldReport r;
    r.category = cat;
    std::vector<LupiExample> test, rest;
    for (auto i : fold.test) test.push_back(data[i]);
    for (auto i : fold.rest) rest.push_back(data[i]);
    if (test.size() < cfg.min_queries) {
      r.skipped = true;
      r.note = "only " + std::to_string(test.size()) + " queries (< " + std::to_string(cfg.min_queries) + ")";
      std::cerr << "warning: skipping fold " << cat << ": " << r.note << "\n";
      out.push_back(r);
      if (on_fold) on_fold(r);
      continue;
    }
    const std::uint64_t fold_seed = cfg.seed ^ fnv1a(cat);
    std::vector<LupiExample> train, validation;
    if (cfg.validation_from_test) {
      auto s = split_validation(test, cfg.validation_fraction, fold_seed);
      train = std::move(rest);
      validation = std::move(s.validation);
      test = std::move(s.train);
    } else {
      auto s = split_validation(rest, cfg.validation_fraction, fold_seed);
      train = std::move(s.train);
      validation = std::move(s.validation);
    }
    r.n_train = train.size();
    r.n_validation = validation.size();
    r.n_test = test.size();

    auto teacher = train_teacher(TeacherModel::init(cfg.tokenizer, cfg.encoder, cfg.priv, cfg.seed), train,
                                 validation, verdicts, cfg.teacher_train);
    auto student = distill_student(teacher, cfg.weights, train, validation, verdicts, cfg.student_train);
    auto baseline = train_baseline(StudentModel::init(cfg.tokenizer, cfg.encoder, cfg.seed), train, validation,
                                   cfg.student_train);

    std::vector<double> ts, ss, bs, truth, exp;
    for (auto& e : test) {
      ts.push_back(predict_teacher(teacher, e, verdicts));
      ss.push_back(predict_student(student, e.query));
      bs.push_back(predict_student(baseline, e.query));
      truth.push_back(e.toxicity);
      exp.push_back(e.expansion);
      if (privileged_texts(e.serp, cfg.priv, verdicts).empty()) ++r.empty_privileged;
    }
    r.teacher = top_k_by_score(test, ts, cfg.top_k);
    r.student = top_k_by_score(test, ss, cfg.top_k);
    r.baseline = top_k_by_score(test, bs, cfg.top_k);
    // Upper bound: toxicity and expansion sorted independently on ground truth.
    r.max.toxicity = top_k_by_score(test, truth, cfg.top_k).toxicity;
    r.max.expansion = top_k_by_score(test, exp, cfg.top_k).expansion;
    out.push_back(r);
    if (on_fold) on_fold(r);
  }
  return out;
}

json fold_reports_to_json(std::span<const FoldReport> folds) {
  json arr = json::array();
  auto tk = [](const TopK& t) { return json{{"toxicity", t.toxicity}, {"expansion", t.expansion}}; };
  for (auto& f : folds) {
    json j{{"category", f.category}, {"skipped", f.skipped}};
    if (!f.note.empty()) j["note"] = f.note;
    if (!f.skipped) {
      j["n_train"] = f.n_train;
      j["n_validation"] = f.n_validation;
      j["n_test"] = f.n_test;
      j["empty_privileged"] = f.empty_privileged;
      j["max"] = tk(f.max);
      j["baseline"] = tk(f.baseline);
      j["teacher"] = tk(f.teacher);
      j["student"] = tk(f.student);
    }
    arr.push_back(j);
  }
  return arr;
}

std::vector<RankedKeyword> rank_keywords(const StudentModel& student, std::span<const KeywordSuggestion> keywords,
                                         std::size_t k) {
  std::map<std::string, std::set<std::string>> by_cat;
  for (auto& kw : keywords) by_cat[kw.category].insert(kw.text);
  std::vector<RankedKeyword> out;
  for (auto& [cat, queries] : by_cat) {
    std::vector<RankedKeyword> rows;
    for (auto& q : queries) rows.push_back({cat, q, std::clamp(predict_student(student, q), 0.0, 1.0)});
    std::sort(rows.begin(), rows.end(), [](const RankedKeyword& a, const RankedKeyword& b) {
      return a.score != b.score ? a.score > b.score : a.query < b.query;
    });
    if (rows.size() > k) rows.resize(k);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::string ranked_to_csv(std::span<const RankedKeyword> ranked) {
  std::string out = "category,rank,query,score\n";
  std::map<std::string, int> rank;
  for (auto& r : ranked)
    out += csv_escape(r.category) + "," + std::to_string(++rank[r.category]) + "," + csv_escape(r.query) + "," +
           format_double(r.score) + "\n";
  return out;
}

std::vector<RankedKeyword> ranked_from_csv(std::string_view csv) {
  std::vector<RankedKeyword> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1 || trim(line).empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != 4) throw ParseError("expected category,rank,query,score", no);
    try {
      out.push_back({f[0], f[2], std::stod(f[3])});
    } catch (const std::logic_error&) {
      throw ParseError("bad score", no);
    }
  }
  return out;
}

}  // namespace scamrank
