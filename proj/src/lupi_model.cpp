#include "scamrank/lupi.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>

namespace scamrank {

using nlohmann::json;

// ---------------------------------------------------------------- tokenizer

void TokenizerConfig::validate() const {
  if (vocab_size < 16) throw Error("vocab_size must be >= 16");
  if (max_len < 2 || serp_max_len < 2) throw Error("max_len must be >= 2");
  if (head_fraction < 0.0 || head_fraction >= 1.0) throw Error("head_fraction must be in [0, 1)");
}

std::vector<std::string> Tokenizer::words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Tokenizer::Tokenizer(TokenizerConfig cfg, std::span<const std::string> ranked_words) : cfg_(cfg) {
  cfg_.validate();
  const int budget = std::clamp(static_cast<int>(cfg_.vocab_size * cfg_.head_fraction) - 2, 0, cfg_.vocab_size - 3);
  std::uint64_t h = fnv1a(std::to_string(cfg_.vocab_size));
  for (auto& w : ranked_words) {
    if (static_cast<int>(head_.size()) >= budget) break;
    auto ws = words(w);
    if (ws.size() != 1 || ws[0] != w || head_.contains(w)) continue;
    head_.emplace(w, 2 + static_cast<int>(head_.size()));
    h = fnv1a(w + "\n", h);
  }
  digest_ = hex64(h);
}

Tokenizer Tokenizer::bundled(const TokenizerConfig& cfg) {
  static const std::vector<std::string> ranked = read_lines(data_dir() / "wordfreq.txt");
  return Tokenizer(cfg, ranked);
}

const Tokenizer& bundled_tokenizer(const TokenizerConfig& cfg) {
  static std::mutex mu;
  static std::vector<std::unique_ptr<Tokenizer>> cache;
  std::lock_guard lock(mu);
  for (auto& t : cache)
    if (t->config() == cfg) return *t;
  cache.push_back(std::make_unique<Tokenizer>(Tokenizer::bundled(cfg)));
  return *cache.back();
}

int Tokenizer::word_id(std::string_view word) const {
  if (auto it = head_.find(std::string(word)); it != head_.end()) return it->second;
  const int first = 2 + static_cast<int>(head_.size());
  const auto buckets = static_cast<std::uint64_t>(cfg_.vocab_size - first);
  return first + static_cast<int>(fnv1a(word) % buckets);
}

std::vector<int> Tokenizer::encode(std::string_view text, int max_len) const {
  std::vector<int> ids{kClsId};
  for (auto& w : words(text)) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(word_id(w));
  }
  ids.resize(static_cast<std::size_t>(max_len), kPadId);
  return ids;
}

// ------------------------------------------------------- privileged inputs

void PrivilegedConfig::validate() const {
  if (size < 5 || size > 50) throw Error("privileged size must be in [5, 50]");
}

PrivilegedConfig parse_privileged(std::string_view spec) {
  auto f = split(to_lower(trim(spec)), ':');
  if (f.size() != 5) throw Error("privileged config must be engine:field:filter:selection:size");
  PrivilegedConfig p;
  if (f[0] == "google") p.engine = PrivEngine::Google;
  else if (f[0] == "bing") p.engine = PrivEngine::Bing;
  else if (f[0] == "baidu") p.engine = PrivEngine::Baidu;
  else if (f[0] == "all") p.engine = PrivEngine::All;
  else throw UnknownEngine(f[0]);
  if (f[1] == "title") p.field = PrivField::Title;
  else if (f[1] == "description") p.field = PrivField::Description;
  else if (f[1] == "both") p.field = PrivField::Both;
  else throw Error("unknown privileged field: " + f[1]);
  if (f[2] == "all") p.filter = PrivFilter::All;
  else if (f[2] == "scam_only") p.filter = PrivFilter::ScamOnly;
  else throw Error("unknown privileged filter: " + f[2]);
  if (f[3] == "ranked") p.selection = PrivSelection::Ranked;
  else if (f[3] == "random") p.selection = PrivSelection::Random;
  else throw Error("unknown privileged selection: " + f[3]);
  try {
    p.size = std::stoi(f[4]);
  } catch (const std::logic_error&) {
    throw Error("bad privileged size: " + f[4]);
  }
  p.validate();
  return p;
}

std::string to_string(const PrivilegedConfig& p) {
  static const char* engines[] = {"google", "bing", "baidu", "all"};
  static const char* fields[] = {"title", "description", "both"};
  static const char* filters[] = {"all", "scam_only"};
  static const char* selections[] = {"ranked", "random"};
  return std::string(engines[static_cast<int>(p.engine)]) + ":" + fields[static_cast<int>(p.field)] + ":" +
         filters[static_cast<int>(p.filter)] + ":" + selections[static_cast<int>(p.selection)] + ":" +
         std::to_string(p.size);
}

std::vector<std::string> privileged_texts(const SerpResultSet& serp, const PrivilegedConfig& priv,
                                          const VerdictMap& verdicts, std::uint64_t seed) {
  std::vector<const SerpEntry*> pool;
  for (auto& e : serp.entries) {
    if (priv.engine != PrivEngine::All) {
      static const Engine map[] = {Engine::Google, Engine::Bing, Engine::Baidu};
      if (e.engine != map[static_cast<int>(priv.engine)]) continue;
    }
    if (priv.filter == PrivFilter::ScamOnly) {
      auto it = verdicts.find(e.root_domain);
      if (it == verdicts.end() || it->second != Label::Scam) continue;
    }
    pool.push_back(&e);
  }
  std::stable_sort(pool.begin(), pool.end(), [](auto* a, auto* b) {
    return a->rank != b->rank ? a->rank < b->rank : a->engine < b->engine;
  });
  if (priv.selection == PrivSelection::Random) {
    std::mt19937_64 rng(seed ^ fnv1a(serp.query));
    std::shuffle(pool.begin(), pool.end(), rng);
  }
  if (pool.size() > static_cast<std::size_t>(priv.size)) pool.resize(static_cast<std::size_t>(priv.size));
  std::vector<std::string> out;
  for (auto* e : pool) {
    switch (priv.field) {
      case PrivField::Title: out.push_back(e->title); break;
      case PrivField::Description: out.push_back(e->description); break;
      case PrivField::Both: out.push_back(e->title + " " + e->description); break;
    }
  }
  return out;
}

// ------------------------------------------------------------------ dataset

json lupi_example_to_json(const LupiExample& e) {
  return json{{"query", e.query},
              {"category", e.category},
              {"toxicity", e.toxicity},
              {"expansion", e.expansion},
              {"serp", serp_to_json(e.serp)}};
}

LupiExample lupi_example_from_json(const json& j) {
  LupiExample e;
  e.query = j.at("query").get<std::string>();
  e.category = j.value("category", "");
  e.toxicity = j.at("toxicity").get<double>();
  e.expansion = j.value("expansion", 0);
  if (j.contains("serp")) e.serp = serp_from_json(j.at("serp"));
  else e.serp.query = e.query;
  if (!(e.toxicity >= 0.0 && e.toxicity <= 1.0)) throw SchemaError("toxicity must be in [0, 1]");
  return e;
}

std::vector<LupiExample> read_lupi_examples(const std::filesystem::path& path) {
  std::vector<LupiExample> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(lupi_example_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad training record: ") + e.what(), no);
    }
  }
  return out;
}

void write_lupi_examples(const std::filesystem::path& path, std::span<const LupiExample> examples) {
  std::string out;
  for (auto& e : examples) out += lupi_example_to_json(e).dump() + "\n";
  write_file(path, out);
}

// -------------------------------------------------------------------- models

namespace {

EncoderConfig query_encoder_config(const TokenizerConfig& tok, EncoderConfig enc) {
  enc.vocab_size = tok.vocab_size;
  enc.max_len = tok.max_len;
  return enc;
}

EncoderConfig serp_encoder_config(const TokenizerConfig& tok, EncoderConfig enc) {
  enc.vocab_size = tok.vocab_size;
  enc.max_len = tok.serp_max_len;
  return enc;
}

}  // namespace

TeacherModel TeacherModel::init(const TokenizerConfig& tok, const EncoderConfig& enc, const PrivilegedConfig& priv,
                                std::uint64_t seed) {
  tok.validate();
  priv.validate();
  TeacherModel m;
  m.tokenizer = tok;
  m.encoder = query_encoder_config(tok, enc);
  m.priv = priv;
  std::mt19937_64 rng_q(seed ^ 0x71), rng_s(seed ^ 0x5e), rng_h(seed ^ 0x4d);
  m.query_encoder = Encoder(m.encoder, rng_q);
  m.serp_encoder = Encoder(serp_encoder_config(tok, enc), rng_s);
  const int d = enc.dim;
  m.fuse_w = Param("fuse_w", glorot(2 * d, d, rng_h));
  m.fuse_b = Param("fuse_b", Mat::Zero(1, d));
  m.head_w = Param("head_w", glorot(d, 1, rng_h));
  m.head_b = Param("head_b", Mat::Zero(1, 1));
  return m;
}

ParamList TeacherModel::params() {
  ParamList out = query_encoder.params();
  for (auto* p : serp_encoder.params()) out.push_back(p);
  for (Param* p : {&fuse_w, &fuse_b, &head_w, &head_b}) out.push_back(p);
  return out;
}

TeacherOutput teacher_forward(const TeacherModel& m, const std::vector<int>& query_ids,
                              const std::vector<std::vector<int>>& serp_ids, TrainContext ctx, TeacherPass* pass) {
  TeacherPass local;
  TeacherPass& P = pass ? *pass : local;
  const int d = m.encoder.dim;
  Mat q = m.query_encoder.forward(query_ids, P.query, ctx);
  Mat pooled = Mat::Zero(1, d);
  P.serp.assign(serp_ids.size(), {});
  for (std::size_t i = 0; i < serp_ids.size(); ++i) pooled += m.serp_encoder.forward(serp_ids[i], P.serp[i], ctx).row(0);
  if (!serp_ids.empty()) pooled /= static_cast<double>(serp_ids.size());

  P.concat.resize(1, 2 * d);
  P.concat.leftCols(d) = q.row(0);
  P.concat.rightCols(d) = pooled;
  P.pre = P.concat * m.fuse_w.value + m.fuse_b.value;
  P.relu_mask = (P.pre.array() > 0.0).cast<double>();
  P.drop = ctx.training() ? dropout_mask(1, d, m.encoder.dropout, *ctx.rng) : Mat::Ones(1, d);
  P.out.fused = P.pre.cwiseMax(0.0).cwiseProduct(P.drop);
  P.out.score = (P.out.fused * m.head_w.value)(0, 0) + m.head_b.value(0, 0);
  P.out.query_attention = P.query.attention();
  P.out.empty_privileged = serp_ids.empty();
  return P.out;
}

void teacher_backward(TeacherModel& m, const TeacherPass& P, double dscore) {
  const int d = m.encoder.dim;
  m.head_w.grad += P.out.fused.transpose() * dscore;
  m.head_b.grad(0, 0) += dscore;
  Mat dpre = (dscore * m.head_w.value.transpose()).cwiseProduct(P.drop).cwiseProduct(P.relu_mask);
  m.fuse_w.grad += P.concat.transpose() * dpre;
  m.fuse_b.grad += dpre;
  Mat dconcat = dpre * m.fuse_w.value.transpose();

  Mat dq = Mat::Zero(static_cast<Eigen::Index>(P.query.ids.size()), d);
  dq.row(0) = dconcat.leftCols(d);
  m.query_encoder.backward(P.query, dq);
  if (P.serp.empty()) return;
  const Mat dpool = dconcat.rightCols(d) / static_cast<double>(P.serp.size());
  for (auto& c : P.serp) {
    Mat ds = Mat::Zero(static_cast<Eigen::Index>(c.ids.size()), d);
    ds.row(0) = dpool;
    m.serp_encoder.backward(c, ds);
  }
}

StudentModel StudentModel::init(const TokenizerConfig& tok, const EncoderConfig& enc, std::uint64_t seed) {
  tok.validate();
  StudentModel m;
  m.tokenizer = tok;
  m.encoder = query_encoder_config(tok, enc);
  // Same stream as the teacher's query encoder, so a teacher and a student
  // built from one seed start from the same backbone.
  std::mt19937_64 rng_q(seed ^ 0x71), rng_h(seed ^ 0x5d);
  m.query_encoder = Encoder(m.encoder, rng_q);
  const int d = enc.dim, f = enc.ff_dim;
  m.pred_w1 = Param("pred_w1", glorot(d, f, rng_h));
  m.pred_b1 = Param("pred_b1", Mat::Zero(1, f));
  m.pred_w2 = Param("pred_w2", glorot(f, 1, rng_h));
  m.pred_b2 = Param("pred_b2", Mat::Zero(1, 1));
  m.dist_w = Param("dist_w", glorot(d, d, rng_h));
  m.dist_b = Param("dist_b", Mat::Zero(1, d));
  return m;
}

StudentModel StudentModel::from_teacher(const TeacherModel& teacher, std::uint64_t seed) {
  StudentModel m = init(teacher.tokenizer, teacher.encoder, seed);
  m.query_encoder = teacher.query_encoder;
  return m;
}

ParamList StudentModel::params() {
  ParamList out = query_encoder.params();
  for (auto* p : head_params()) out.push_back(p);
  return out;
}

ParamList StudentModel::head_params() { return {&pred_w1, &pred_b1, &pred_w2, &pred_b2, &dist_w, &dist_b}; }

StudentOutput student_forward(const StudentModel& m, const std::vector<int>& query_ids, TrainContext ctx,
                              StudentPass* pass) {
  StudentPass local;
  StudentPass& P = pass ? *pass : local;
  const int d = m.encoder.dim;
  P.cls = m.query_encoder.forward(query_ids, P.enc, ctx).row(0);
  P.out.hint = P.cls * m.dist_w.value + m.dist_b.value;
  P.drop = ctx.training() ? dropout_mask(1, d, m.encoder.dropout, *ctx.rng) : Mat::Ones(1, d);
  P.pre = P.cls.cwiseProduct(P.drop) * m.pred_w1.value + m.pred_b1.value;
  P.hidden = P.pre.cwiseMax(0.0);
  P.out.score = (P.hidden * m.pred_w2.value)(0, 0) + m.pred_b2.value(0, 0);
  P.out.attention = P.enc.attention();
  return P.out;
}

// ------------------------------------------------------------------- losses

void LossWeights::validate() const {
  for (double v : {gt, pm, hm, am})
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("loss weights must be finite and >= 0");
  if (gt == 0.0 && pm == 0.0 && hm == 0.0 && am == 0.0) throw Error("at least one loss weight must be positive");
}

LossWeights parse_weights(std::string_view csv) {
  auto f = split(csv, ',');
  if (f.size() != 4) throw Error("weights must be gt,pm,hm,am");
  LossWeights w;
  try {
    w = {std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
  } catch (const std::logic_error&) {
    throw Error("bad weights: " + std::string(csv));
  }
  w.validate();
  return w;
}

namespace {
double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

LossTerms total_loss(StudentModel& student, std::span<const StudentSample> batch, const LossWeights& w,
                     TrainContext ctx, bool accumulate) {
  w.validate();
  LossTerms t;
  if (batch.empty()) return t;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const int d = student.encoder.dim;
  StudentPass P;
  for (auto& s : batch) {
    const auto& tg = *s.target;
    student_forward(student, *s.query_ids, ctx, &P);
    const double score = P.out.score;
    double dscore = 0.0;
    Mat dhint;
    AttentionMaps dattn;
    bool has_dattn = false;

    if (w.gt > 0.0) {
      t.gt += std::abs(score - tg.label) * inv_b;
      dscore += w.gt * sign(score - tg.label) * inv_b;
    }
    if (w.pm > 0.0) {
      t.pm += std::abs(score - tg.teacher_score) * inv_b;
      dscore += w.pm * sign(score - tg.teacher_score) * inv_b;
    }
    if (w.hm > 0.0) {
      if (tg.fused.cols() != d) throw SchemaError("hint and fused representation differ in shape");
      Mat diff = P.out.hint - tg.fused;
      t.hm += diff.squaredNorm() / d * inv_b;
      dhint = w.hm * 2.0 / d * inv_b * diff;
    }
    if (w.am > 0.0) {
      const auto& A = P.out.attention;
      if (tg.attention.size() != A.size()) throw SchemaError("teacher and student depth differ");
      const double inv_l = 1.0 / static_cast<double>(A.size());
      dattn.resize(A.size());
      double term = 0.0;
      for (std::size_t l = 0; l < A.size(); ++l) {
        if (tg.attention[l].size() != A[l].size()) throw SchemaError("teacher and student head counts differ");
        const double inv_h = 1.0 / static_cast<double>(A[l].size());
        for (std::size_t h = 0; h < A[l].size(); ++h) {
          const Mat& ps = A[l][h];
          const Mat& pt = tg.attention[l][h];
          if (ps.rows() != pt.rows() || ps.cols() != pt.cols())
            throw SchemaError("teacher and student attention maps differ in shape");
          Mat diff = ps - pt;
          const double inv_n = 1.0 / static_cast<double>(diff.size());
          term += inv_l * inv_h * inv_n * diff.squaredNorm();
          dattn[l].push_back(w.am * inv_b * inv_l * inv_h * inv_n * 2.0 * diff);
        }
      }
      t.am += term * inv_b;
      has_dattn = true;
    }

    if (!accumulate) continue;
    student.pred_w2.grad += P.hidden.transpose() * dscore;
    student.pred_b2.grad(0, 0) += dscore;
    Mat dpre = (dscore * student.pred_w2.value.transpose()).cwiseProduct((P.pre.array() > 0.0).cast<double>().matrix());
    student.pred_w1.grad += (P.cls.cwiseProduct(P.drop)).transpose() * dpre;
    student.pred_b1.grad += dpre;
    Mat dcls = (dpre * student.pred_w1.value.transpose()).cwiseProduct(P.drop);
    if (dhint.size()) {
      student.dist_w.grad += P.cls.transpose() * dhint;
      student.dist_b.grad += dhint;
      dcls += dhint * student.dist_w.value.transpose();
    }
    Mat dout = Mat::Zero(static_cast<Eigen::Index>(P.enc.ids.size()), d);
    dout.row(0) = dcls;
    student.query_encoder.backward(P.enc, dout, has_dattn ? &dattn : nullptr);
  }
  t.total = w.gt * t.gt + w.pm * t.pm + w.hm * t.hm + w.am * t.am;
  return t;
}

// -------------------------------------------------------------- checkpoints

namespace {

constexpr const char* kLupiFormat = "scamrank-lupi/1";

json params_to_json(const ParamList& params, const std::string& prefix, json& into) {
  for (auto* p : params) {
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    into[prefix + p->name] = json{{"rows", p->value.rows()}, {"cols", p->value.cols()}, {"data", data}};
  }
  return into;
}

void params_from_json(const ParamList& params, const std::string& prefix, const json& from) {
  for (auto* p : params) {
    auto key = prefix + p->name;
    if (!from.contains(key)) throw SchemaError("checkpoint is missing parameter " + key);
    auto& e = from.at(key);
    if (e.at("rows").get<Eigen::Index>() != p->value.rows() || e.at("cols").get<Eigen::Index>() != p->value.cols())
      throw SchemaError("checkpoint parameter " + key + " has the wrong shape");
    auto data = e.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != p->value.size())
      throw SchemaError("checkpoint parameter " + key + " has the wrong size");
    std::copy(data.begin(), data.end(), p->value.data());
  }
}

json tokenizer_to_json(const TokenizerConfig& t) {
  return json{{"vocab_size", t.vocab_size},
              {"max_len", t.max_len},
              {"serp_max_len", t.serp_max_len},
              {"head_fraction", t.head_fraction},
              {"head_digest", bundled_tokenizer(t).head_digest()}};
}

TokenizerConfig tokenizer_from_json(const json& j) {
  TokenizerConfig t;
  t.vocab_size = j.at("vocab_size");
  t.max_len = j.at("max_len");
  t.serp_max_len = j.at("serp_max_len");
  t.head_fraction = j.at("head_fraction");
  t.validate();
  if (j.contains("head_digest") && j.at("head_digest") != bundled_tokenizer(t).head_digest())
    throw SchemaError("checkpoint was trained with a different word table");
  return t;
}

void check_format(const json& j, const char* kind) {
  if (j.value("format", "") != kLupiFormat) throw SchemaError(std::string("not a ") + kLupiFormat + " checkpoint");
  if (j.value("kind", "") != kind) throw SchemaError(std::string("checkpoint is not a ") + kind + " model");
}

}  // namespace

json teacher_to_json(const TeacherModel& m) {
  auto& mm = const_cast<TeacherModel&>(m);
  json params = json::object();
  params_to_json(mm.query_encoder.params(), "query.", params);
  params_to_json(mm.serp_encoder.params(), "serp.", params);
  params_to_json({&mm.fuse_w, &mm.fuse_b, &mm.head_w, &mm.head_b}, "", params);
  return json{{"format", kLupiFormat},
              {"kind", "teacher"},
              {"tokenizer", tokenizer_to_json(m.tokenizer)},
              {"encoder", encoder_config_to_json(m.encoder)},
              {"privileged", to_string(m.priv)},
              {"params", params}};
}

TeacherModel teacher_from_json(const json& j) {
  check_format(j, "teacher");
  auto m = TeacherModel::init(tokenizer_from_json(j.at("tokenizer")), encoder_config_from_json(j.at("encoder")),
                              parse_privileged(j.at("privileged").get<std::string>()), 0);
  auto& p = j.at("params");
  params_from_json(m.query_encoder.params(), "query.", p);
  params_from_json(m.serp_encoder.params(), "serp.", p);
  params_from_json({&m.fuse_w, &m.fuse_b, &m.head_w, &m.head_b}, "", p);
  return m;
}

json student_to_json(const StudentModel& m) {
  auto& mm = const_cast<StudentModel&>(m);
  json params = json::object();
  params_to_json(mm.query_encoder.params(), "query.", params);
  params_to_json(mm.head_params(), "", params);
  return json{{"format", kLupiFormat},
              {"kind", "student"},
              {"tokenizer", tokenizer_to_json(m.tokenizer)},
              {"encoder", encoder_config_to_json(m.encoder)},
              {"params", params}};
}

StudentModel student_from_json(const json& j) {
  check_format(j, "student");
  auto m = StudentModel::init(tokenizer_from_json(j.at("tokenizer")), encoder_config_from_json(j.at("encoder")), 0);
  auto& p = j.at("params");
  params_from_json(m.query_encoder.params(), "query.", p);
  params_from_json(m.head_params(), "", p);
  return m;
}

void save_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump() + "\n"); }

json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace scamrank
