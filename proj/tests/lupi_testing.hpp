#pragma once

// Tiny randomized LUPI setups and a central finite-difference check of the
// student loss gradients.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "scamrank/lupi.hpp"

namespace scamrank::fixtures {

struct TinySetup {
  TeacherModel teacher;
  StudentModel student;
  std::vector<std::vector<int>> queries;
  std::vector<DistillTarget> targets;

  std::vector<StudentSample> batch() const {
    std::vector<StudentSample> b;
    for (std::size_t i = 0; i < queries.size(); ++i) b.push_back({&queries[i], &targets[i]});
    return b;
  }
};

inline std::vector<int> random_ids(std::mt19937_64& rng, int vocab, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len - 1), id(2, vocab - 1);
  std::vector<int> ids{kClsId};
  for (int i = len(rng); i > 0; --i) ids.push_back(id(rng));
  ids.resize(static_cast<std::size_t>(max_len), kPadId);
  return ids;
}

// Random small architecture; the student starts from the teacher's backbone
// and is then perturbed so that every loss term is active.
inline TinySetup make_tiny_setup(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::initializer_list<int> v) { return *(v.begin() + static_cast<long>(rng() % v.size())); };
  TokenizerConfig tok;
  tok.vocab_size = 32;
  tok.max_len = pick({4, 5, 6});
  tok.serp_max_len = 6;
  EncoderConfig enc;
  enc.layers = pick({1, 2});
  enc.heads = pick({1, 2});
  enc.dim = pick({4, 8});  // layer norm over 2 features is nearly a sign function
  enc.ff_dim = pick({4, 8});
  enc.vocab_size = tok.vocab_size;
  enc.max_len = tok.serp_max_len;
  PrivilegedConfig priv;
  priv.size = 5;

  TinySetup s{TeacherModel::init(tok, enc, priv, seed), {}, {}, {}};
  s.student = StudentModel::from_teacher(s.teacher, seed + 1);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (auto* p : s.student.params())
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += noise(rng);

  std::uniform_real_distribution<double> label(0.0, 1.0);
  const int n = pick({2, 3});
  for (int i = 0; i < n; ++i) {
    s.queries.push_back(random_ids(rng, tok.vocab_size, tok.max_len));
    std::vector<std::vector<int>> serp;
    for (int k = pick({0, 1, 3}); k > 0; --k) serp.push_back(random_ids(rng, tok.vocab_size, tok.serp_max_len));
    auto out = teacher_forward(s.teacher, s.queries.back(), serp);
    s.targets.push_back({label(rng), out.score, out.fused, out.query_attention});
  }
  return s;
}

struct GradCheck {
  double max_rel_error = 0.0;  // worst single entry
  std::string worst;
  // Worst per-tensor ||analytic - numeric|| / max(||analytic||, ||numeric||).
  double tensor_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
};

// Smallest distance of any ReLU input in the student head or any MAE
// residual from its kink at zero.
inline double kink_margin(const TinySetup& s, const LossWeights& w) {
  double margin = 1e9;
  for (std::size_t i = 0; i < s.queries.size(); ++i) {
    StudentPass pass;
    student_forward(s.student, s.queries[i], {}, &pass);
    margin = std::min(margin, pass.pre.cwiseAbs().minCoeff());
    if (w.gt != 0) margin = std::min(margin, std::abs(pass.out.score - s.targets[i].label));
    if (w.pm != 0) margin = std::min(margin, std::abs(pass.out.score - s.targets[i].teacher_score));
  }
  return margin;
}

// |analytic - numeric| / max(|analytic|, |numeric|, floor) over every
// student parameter entry. With `richardson`, numeric = (4 D(h/2) - D(h)) / 3
// for the central difference D, cancelling the h^2 truncation term. Embedding rows of tokens absent from the batch
// must have an exactly zero gradient and are not differenced.
inline GradCheck check_gradients(TinySetup& s, const LossWeights& w, double h = 1e-3, double floor = 1e-6,
                                  bool richardson = false) {
  auto batch = s.batch();
  auto params = s.student.params();
  zero_grads(params);
  total_loss(s.student, batch, w, {}, true);
  std::vector<bool> used(static_cast<std::size_t>(s.student.tokenizer.vocab_size), false);
  for (auto& q : s.queries)
    for (int id : q) used[static_cast<std::size_t>(id)] = true;

  GradCheck out;
  for (auto* p : params) {
    const bool embedding = p == params.front();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        double analytic = p->grad(r, c);
        double numeric;
        if (embedding && !used[static_cast<std::size_t>(r)]) {
          numeric = 0.0;
        } else {
          const double v = p->value(r, c);
          auto central = [&](double step) {
            p->value(r, c) = v + step;
            double up = total_loss(s.student, batch, w, {}, false).total;
            p->value(r, c) = v - step;
            double down = total_loss(s.student, batch, w, {}, false).total;
            p->value(r, c) = v;
            return (up - down) / (2 * step);
          };
          numeric = central(h);
          if (richardson) numeric = (4 * central(h / 2) - numeric) / 3;
        }
        diff2 += (analytic - numeric) * (analytic - numeric);
        a2 += analytic * analytic;
        n2 += numeric * numeric;
        double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
        if (std::abs(analytic - numeric) == 0.0) rel = 0.0;
        ++out.checked;
        if (rel > out.max_rel_error) {
          out.max_rel_error = rel;
          out.worst = p->name + "[" + std::to_string(r) + "," + std::to_string(c) + "] analytic=" +
                      std::to_string(analytic) + " numeric=" + std::to_string(numeric);
        }
      }
    }
    double denom = std::max(std::sqrt(std::max(a2, n2)), floor);
    double trel = std::sqrt(diff2) / denom;
    if (trel > out.tensor_rel_error) {
      out.tensor_rel_error = trel;
      out.worst_tensor = p->name;
    }
  }
  return out;
}

}  // namespace scamrank::fixtures
