#include "scamrank/encoder.hpp"

#include <cmath>

#include "scamrank/common.hpp"

namespace scamrank {

using nlohmann::json;

void EncoderConfig::validate() const {
  if (layers < 1 || dim < 1 || heads < 1 || ff_dim < 1) throw Error("encoder sizes must be positive");
  if (dim % heads != 0) throw Error("encoder dim must be divisible by heads");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must be in [0, 1)");
  if (vocab_size < 16) throw Error("vocab_size must be >= 16");
  if (max_len < 2) throw Error("max_len must be >= 2");
}

json encoder_config_to_json(const EncoderConfig& c) {
  return json{{"layers", c.layers},   {"dim", c.dim},
              {"heads", c.heads},     {"ff_dim", c.ff_dim},
              {"dropout", c.dropout}, {"vocab_size", c.vocab_size},
              {"max_len", c.max_len}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.layers = j.at("layers");
  c.dim = j.at("dim");
  c.heads = j.at("heads");
  c.ff_dim = j.at("ff_dim");
  c.dropout = j.at("dropout");
  c.vocab_size = j.at("vocab_size");
  c.max_len = j.at("max_len");
  c.validate();
  return c;
}

AttentionMaps EncoderCache::attention() const {
  AttentionMaps out;
  for (auto& l : layers) out.push_back(l.probs);
  return out;
}

Encoder::Encoder(const EncoderConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg.dim, f = cfg.ff_dim;
  tok_emb = Param("tok_emb", random_normal(cfg.vocab_size, d, 1.0, rng));
  for (int l = 0; l < cfg.layers; ++l) {
    auto n = [&](const char* s) { return "layer" + std::to_string(l) + "." + s; };
    Layer L;
    L.ln1_g = Param(n("ln1_g"), Mat::Ones(1, d));
    L.ln1_b = Param(n("ln1_b"), Mat::Zero(1, d));
    L.wq = Param(n("wq"), glorot(d, d, rng));
    L.bq = Param(n("bq"), Mat::Zero(1, d));
    L.wk = Param(n("wk"), glorot(d, d, rng));
    L.bk = Param(n("bk"), Mat::Zero(1, d));
    L.wv = Param(n("wv"), glorot(d, d, rng));
    L.bv = Param(n("bv"), Mat::Zero(1, d));
    L.wo = Param(n("wo"), glorot(d, d, rng));
    L.bo = Param(n("bo"), Mat::Zero(1, d));
    L.ln2_g = Param(n("ln2_g"), Mat::Ones(1, d));
    L.ln2_b = Param(n("ln2_b"), Mat::Zero(1, d));
    L.w1 = Param(n("w1"), glorot(d, f, rng));
    L.b1 = Param(n("b1"), Mat::Zero(1, f));
    L.w2 = Param(n("w2"), glorot(f, d, rng));
    L.b2 = Param(n("b2"), Mat::Zero(1, d));
    layers_.push_back(std::move(L));
  }
  lnf_g = Param("lnf_g", Mat::Ones(1, d));
  lnf_b = Param("lnf_b", Mat::Zero(1, d));
  positions_ = sinusoidal_positions(cfg.max_len, d);
}

ParamList Encoder::params() {
  ParamList out{&tok_emb};
  for (auto& L : layers_)
    for (Param* p : {&L.ln1_g, &L.ln1_b, &L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo, &L.ln2_g, &L.ln2_b,
                     &L.w1, &L.b1, &L.w2, &L.b2})
      out.push_back(p);
  out.push_back(&lnf_g);
  out.push_back(&lnf_b);
  return out;
}

Mat Encoder::forward(const std::vector<int>& ids, EncoderCache& c, TrainContext ctx) const {
  std::size_t n = ids.size();
  while (n > 1 && ids[n - 1] == 0) --n;
  if (n == 0) throw Error("empty token sequence");
  if (n > static_cast<std::size_t>(cfg_.max_len)) n = static_cast<std::size_t>(cfg_.max_len);
  c.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));

  const auto N = static_cast<Eigen::Index>(n);
  const int d = cfg_.dim, H = cfg_.heads, dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double p = ctx.training() ? cfg_.dropout : 0.0;

  Mat h(N, d);
  for (Eigen::Index i = 0; i < N; ++i) {
    int id = c.ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= cfg_.vocab_size) throw Error("token id out of range");
    h.row(i) = tok_emb.value.row(id) + positions_.row(i);
  }
  c.drop_emb = ctx.training() ? dropout_mask(N, d, p, *ctx.rng) : Mat::Ones(N, d);
  h = h.cwiseProduct(c.drop_emb);

  c.layers.assign(layers_.size(), {});
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    auto& C = c.layers[l];
    C.h_in = h;
    C.a = layer_norm(h, L.ln1_g.value, L.ln1_b.value, C.ln1);
    C.q = (C.a * L.wq.value).rowwise() + L.bq.value.row(0);
    C.k = (C.a * L.wk.value).rowwise() + L.bk.value.row(0);
    C.v = (C.a * L.wv.value).rowwise() + L.bv.value.row(0);
    C.o.resize(N, d);
    C.probs.resize(static_cast<std::size_t>(H));
    for (int hd = 0; hd < H; ++hd) {
      Mat s = scale * (C.q.middleCols(hd * dh, dh) * C.k.middleCols(hd * dh, dh).transpose());
      softmax_rows(s);
      C.o.middleCols(hd * dh, dh) = s * C.v.middleCols(hd * dh, dh);
      C.probs[static_cast<std::size_t>(hd)] = std::move(s);
    }
    Mat attn = (C.o * L.wo.value).rowwise() + L.bo.value.row(0);
    C.drop1 = ctx.training() ? dropout_mask(N, d, p, *ctx.rng) : Mat::Ones(N, d);
    C.h_mid = h + attn.cwiseProduct(C.drop1);
    C.b = layer_norm(C.h_mid, L.ln2_g.value, L.ln2_b.value, C.ln2);
    C.pre = (C.b * L.w1.value).rowwise() + L.b1.value.row(0);
    C.f = gelu(C.pre);
    Mat g = (C.f * L.w2.value).rowwise() + L.b2.value.row(0);
    C.drop2 = ctx.training() ? dropout_mask(N, d, p, *ctx.rng) : Mat::Ones(N, d);
    h = C.h_mid + g.cwiseProduct(C.drop2);
  }
  c.h_last = h;
  return layer_norm(h, lnf_g.value, lnf_b.value, c.ln_f);
}

void Encoder::backward(const EncoderCache& c, const Mat& dout, const AttentionMaps* d_attn) {
  const int d = cfg_.dim, H = cfg_.heads, dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat dh_ = layer_norm_backward(dout, lnf_g.value, c.ln_f, lnf_g.grad, lnf_b.grad);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& L = layers_[l];
    const auto& C = c.layers[l];

    // feed-forward branch
    Mat dg = dh_.cwiseProduct(C.drop2);
    L.w2.grad += C.f.transpose() * dg;
    L.b2.grad.row(0) += dg.colwise().sum();
    Mat dpre = (dg * L.w2.value.transpose()).cwiseProduct(gelu_grad(C.pre));
    L.w1.grad += C.b.transpose() * dpre;
    L.b1.grad.row(0) += dpre.colwise().sum();
    Mat db = dpre * L.w1.value.transpose();
    Mat dmid = dh_ + layer_norm_backward(db, L.ln2_g.value, C.ln2, L.ln2_g.grad, L.ln2_b.grad);

    // attention branch
    Mat dattn = dmid.cwiseProduct(C.drop1);
    L.wo.grad += C.o.transpose() * dattn;
    L.bo.grad.row(0) += dattn.colwise().sum();
    Mat dO = dattn * L.wo.value.transpose();
    Mat dq(dO.rows(), d), dk(dO.rows(), d), dv(dO.rows(), d);
    for (int hd = 0; hd < H; ++hd) {
      const Mat& P = C.probs[static_cast<std::size_t>(hd)];
      auto dOh = dO.middleCols(hd * dh, dh);
      Mat dP = dOh * C.v.middleCols(hd * dh, dh).transpose();
      if (d_attn) dP += (*d_attn)[l][static_cast<std::size_t>(hd)];
      dv.middleCols(hd * dh, dh) = P.transpose() * dOh;
      Eigen::VectorXd rs = (dP.cwiseProduct(P)).rowwise().sum();
      Mat dS = P.cwiseProduct(dP.colwise() - rs) * scale;
      dq.middleCols(hd * dh, dh) = dS * C.k.middleCols(hd * dh, dh);
      dk.middleCols(hd * dh, dh) = dS.transpose() * C.q.middleCols(hd * dh, dh);
    }
    L.wq.grad += C.a.transpose() * dq;
    L.bq.grad.row(0) += dq.colwise().sum();
    L.wk.grad += C.a.transpose() * dk;
    L.bk.grad.row(0) += dk.colwise().sum();
    L.wv.grad += C.a.transpose() * dv;
    L.bv.grad.row(0) += dv.colwise().sum();
    Mat da = dq * L.wq.value.transpose() + dk * L.wk.value.transpose() + dv * L.wv.value.transpose();
    dh_ = dmid + layer_norm_backward(da, L.ln1_g.value, C.ln1, L.ln1_g.grad, L.ln1_b.grad);
  }
  Mat demb = dh_.cwiseProduct(c.drop_emb);
  for (std::size_t i = 0; i < c.ids.size(); ++i)
    tok_emb.grad.row(c.ids[i]) += demb.row(static_cast<Eigen::Index>(i));
}

}  // namespace scamrank
