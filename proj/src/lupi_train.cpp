#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scamrank/lupi.hpp"

namespace scamrank {

using nlohmann::json;

void LupiTrainConfig::validate() const {
  if (!(lr >= 0.0)) throw Error("lr must be >= 0");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0) throw Error("warmup_fraction must be in [0, 1]");
  if (patience < 1) throw Error("patience must be >= 1");
  if (weight_decay < 0.0) throw Error("weight_decay must be >= 0");
}

json train_config_to_json(const LupiTrainConfig& c) {
  return json{{"lr", c.lr},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"warmup_fraction", c.warmup_fraction},
              {"patience", c.patience},
              {"seed", c.seed},
              {"weight_decay", c.weight_decay},
              {"optimizer", "adamw"}};
}

DatasetSplit split_validation(std::span<const LupiExample> data, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5b1170);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(data.size())));
  DatasetSplit out;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_val ? out.validation : out.train).push_back(data[idx[i]]);
  return out;
}

namespace {

struct TeacherInput {
  std::vector<int> query;
  std::vector<std::vector<int>> serp;
  double label = 0.0;
};

std::vector<TeacherInput> prepare_teacher(const TeacherModel& m, std::span<const LupiExample> data,
                                          const VerdictMap& verdicts) {
  const auto& tok = bundled_tokenizer(m.tokenizer);
  std::vector<TeacherInput> out;
  out.reserve(data.size());
  for (auto& e : data) {
    TeacherInput in{tok.encode_query(e.query), {}, e.toxicity};
    for (auto& text : privileged_texts(e.serp, m.priv, verdicts)) in.serp.push_back(tok.encode_serp(text));
    out.push_back(std::move(in));
  }
  return out;
}

double teacher_mae(const TeacherModel& m, const std::vector<TeacherInput>& data) {
  double s = 0.0;
  for (auto& in : data) s += std::abs(teacher_forward(m, in.query, in.serp).score - in.label);
  return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

long total_steps(std::size_t n, const LupiTrainConfig& cfg) {
  const long per_epoch = static_cast<long>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                           static_cast<std::size_t>(cfg.batch_size));
  return per_epoch * cfg.epochs;
}

// Early-stopping bookkeeping shared by both trainers.
struct Stopper {
  int patience;
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int bad = 0;
  // true if this epoch is the new best
  bool update(double loss, int epoch) {
    if (loss < best) {
      best = loss;
      best_epoch = epoch;
      bad = 0;
      return true;
    }
    ++bad;
    return false;
  }
  bool exhausted() const { return bad >= patience; }
};

}  // namespace

TeacherModel train_teacher(TeacherModel init, std::span<const LupiExample> train,
                           std::span<const LupiExample> validation, const VerdictMap& verdicts,
                           const LupiTrainConfig& cfg, TrainTrace* trace) {
  cfg.validate();
  if (train.empty()) throw Error("empty training set");
  TeacherModel m = std::move(init);
  auto tr = prepare_teacher(m, train, verdicts);
  auto va = prepare_teacher(m, validation, verdicts);

  auto params = m.params();
  AdamW opt(params, {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::mt19937_64 rng(cfg.seed ^ 0x7eac4e5);
  const long steps = total_steps(tr.size(), cfg);
  std::vector<std::size_t> order(tr.size());
  std::iota(order.begin(), order.end(), 0);

  TeacherModel best = m;
  Stopper stop{cfg.patience};
  TeacherPass pass;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      const double inv_b = 1.0 / static_cast<double>(e - b);
      zero_grads(params);
      double loss = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        auto& in = tr[order[i]];
        double s = teacher_forward(m, in.query, in.serp, {&rng}, &pass).score;
        double r = s - in.label;
        loss += std::abs(r) * inv_b;
        teacher_backward(m, pass, (r > 0 ? 1.0 : r < 0 ? -1.0 : 0.0) * inv_b);
      }
      opt.step(params, warmup_linear_lr(cfg.lr, opt.steps(), steps, cfg.warmup_fraction));
      epoch_loss += loss * static_cast<double>(e - b);
      if (trace) {
        trace->step_loss.push_back(loss);
        trace->step_checksum.push_back(checksum(params));
      }
    }
    double val = va.empty() ? epoch_loss / static_cast<double>(tr.size()) : teacher_mae(m, va);
    if (trace) trace->epoch_val_loss.push_back(val);
    if (stop.update(val, epoch)) best = m;
    if (stop.exhausted() && epoch + 1 < cfg.epochs) {
      if (trace) trace->stopped_early = true;
      break;
    }
  }
  if (trace) trace->best_epoch = stop.best_epoch;
  return best;
}

namespace {

struct StudentData {
  std::vector<std::vector<int>> ids;
  std::vector<DistillTarget> targets;
  std::vector<StudentSample> samples() const {
    std::vector<StudentSample> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({&ids[i], &targets[i]});
    return out;
  }
};

StudentData prepare_student(const StudentModel& s, const TeacherModel* teacher, bool need_teacher,
                            std::span<const LupiExample> data, const VerdictMap& verdicts) {
  const auto& tok = bundled_tokenizer(s.tokenizer);
  StudentData out;
  std::vector<TeacherInput> tin;
  if (need_teacher) tin = prepare_teacher(*teacher, data, verdicts);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.ids.push_back(tok.encode_query(data[i].query));
    DistillTarget t;
    t.label = data[i].toxicity;
    if (need_teacher) {
      auto o = teacher_forward(*teacher, tin[i].query, tin[i].serp);
      t.teacher_score = o.score;
      t.fused = std::move(o.fused);
      t.attention = std::move(o.query_attention);
    }
    out.targets.push_back(std::move(t));
  }
  return out;
}

}  // namespace

StudentModel fit_student(StudentModel init, const TeacherModel* teacher, const LossWeights& w,
                         std::span<const LupiExample> train, std::span<const LupiExample> validation,
                         const VerdictMap& verdicts, const LupiTrainConfig& cfg, TrainTrace* trace) {
  cfg.validate();
  w.validate();
  if (train.empty()) throw Error("empty training set");
  const bool need_teacher = w.pm > 0.0 || w.hm > 0.0 || w.am > 0.0;
  if (need_teacher && !teacher) throw Error("teacher terms are weighted but no teacher was given");
  if (teacher && (teacher->encoder != init.encoder || teacher->tokenizer != init.tokenizer))
    throw SchemaError("teacher and student backbones differ in shape");

  StudentModel m = std::move(init);
  auto tr = prepare_student(m, teacher, need_teacher, train, verdicts);
  auto va = prepare_student(m, teacher, need_teacher, validation, verdicts);
  auto tr_samples = tr.samples();
  auto va_samples = va.samples();

  auto params = m.params();
  AdamW opt(params, {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::mt19937_64 rng(cfg.seed ^ 0x57ade47);
  const long steps = total_steps(tr_samples.size(), cfg);
  std::vector<std::size_t> order(tr_samples.size());
  std::iota(order.begin(), order.end(), 0);

  StudentModel best = m;
  Stopper stop{cfg.patience};
  std::vector<StudentSample> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = b; i < e; ++i) batch.push_back(tr_samples[order[i]]);
      zero_grads(params);
      auto loss = total_loss(m, batch, w, {&rng});
      opt.step(params, warmup_linear_lr(cfg.lr, opt.steps(), steps, cfg.warmup_fraction));
      epoch_loss += loss.total * static_cast<double>(e - b);
      if (trace) {
        trace->step_loss.push_back(loss.total);
        trace->step_checksum.push_back(checksum(params));
      }
    }
    double val = va_samples.empty() ? epoch_loss / static_cast<double>(tr_samples.size())
                                    : total_loss(m, va_samples, w, {}, false).total;
    if (trace) trace->epoch_val_loss.push_back(val);
    if (stop.update(val, epoch)) best = m;
    if (stop.exhausted() && epoch + 1 < cfg.epochs) {
      if (trace) trace->stopped_early = true;
      break;
    }
  }
  if (trace) trace->best_epoch = stop.best_epoch;
  return best;
}

StudentModel distill_student(const TeacherModel& teacher, const LossWeights& w, std::span<const LupiExample> train,
                             std::span<const LupiExample> validation, const VerdictMap& verdicts,
                             const LupiTrainConfig& cfg, TrainTrace* trace) {
  return fit_student(StudentModel::from_teacher(teacher, cfg.seed), &teacher, w, train, validation, verdicts, cfg,
                     trace);
}

StudentModel train_baseline(StudentModel init, std::span<const LupiExample> train,
                            std::span<const LupiExample> validation, const LupiTrainConfig& cfg, TrainTrace* trace) {
  static const VerdictMap none;
  return fit_student(std::move(init), nullptr, LossWeights{1.0, 0.0, 0.0, 0.0}, train, validation, none, cfg, trace);
}

LossWeights tune_loss_weights(const TeacherModel& teacher, std::span<const LupiExample> train,
                              std::span<const LupiExample> validation, const VerdictMap& verdicts,
                              const LupiTrainConfig& cfg, int trials, std::uint64_t seed) {
  if (trials < 1) throw Error("trials must be >= 1");
  if (validation.empty()) throw Error("weight tuning needs a validation set");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LossWeights best;
  double best_mae = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    LossWeights w = t == 0 ? LossWeights{} : LossWeights{1.0, u(rng), u(rng), u(rng)};
    auto s = distill_student(teacher, w, train, validation, verdicts, cfg);
    double mae = mae_student(s, validation);
    if (mae < best_mae) {
      best_mae = mae;
      best = w;
    }
  }
  return best;
}

}  // namespace scamrank
