#include "scamrank/tensor.hpp"

#include <cmath>

namespace scamrank {

Mat random_normal(Eigen::Index rows, Eigen::Index cols, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

Mat glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  return random_normal(rows, cols, std::sqrt(2.0 / static_cast<double>(rows + cols)), rng);
}

double checksum(const ParamList& params) {
  double s = 0.0;
  double k = 1.0;
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) s += p->value.data()[i] * (1.0 + 1e-3 * static_cast<double>(i % 97));
    s *= 1.0 + 1e-6 * k;
    k += 1.0;
  }
  return s;
}

void zero_grads(const ParamList& params) {
  for (auto* p : params) p->zero_grad();
}

Mat layer_norm(const Mat& x, const Mat& g, const Mat& b, LayerNormCache& cache) {
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).sum() / d;
    RowVec c = x.row(r).array() - mu;
    double var = c.squaredNorm() / d;
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = is;
    cache.xhat.row(r) = c * is;
  }
  Mat y = cache.xhat.array().rowwise() * g.row(0).array();
  y.rowwise() += b.row(0);
  return y;
}

Mat layer_norm_backward(const Mat& dy, const Mat& g, const LayerNormCache& cache, Mat& dg, Mat& db) {
  dg.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  db.row(0) += dy.colwise().sum();
  const auto d = static_cast<double>(dy.cols());
  Mat dxhat = dy.array().rowwise() * g.row(0).array();
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    double m1 = dxhat.row(r).sum() / d;
    double m2 = dxhat.row(r).dot(cache.xhat.row(r)) / d;
    dx.row(r) = cache.inv_std(r) * (dxhat.row(r).array() - m1 - cache.xhat.row(r).array() * m2).matrix();
  }
  return dx;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
}

Mat gelu(const Mat& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + 0.044715 * v * v * v))); });
}

Mat gelu_grad(const Mat& x) {
  return x.unaryExpr([](double v) {
    double u = kGeluC * (v + 0.044715 * v * v * v);
    double t = std::tanh(u);
    double du = kGeluC * (1.0 + 3.0 * 0.044715 * v * v);
    return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
  });
}

void softmax_rows(Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  Mat m = Mat::Ones(rows, cols);
  if (p <= 0.0) return m;
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(rng) ? scale : 0.0;
  return m;
}

Mat sinusoidal_positions(int len, int dim) {
  Mat p(len, dim);
  for (int pos = 0; pos < len; ++pos)
    for (int i = 0; i < dim; ++i) {
      double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      p(pos, i) = i % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  return p;
}

AdamW::AdamW(const ParamList& params, AdamWConfig cfg) : cfg_(cfg) {
  for (auto* p : params) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::step(const ParamList& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseAbs2();
    p.value *= 1.0 - lr * cfg_.weight_decay;
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

double warmup_linear_lr(double base_lr, long step, long total_steps, double warmup_fraction) {
  const long warmup = static_cast<long>(std::ceil(warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  const long rest = total_steps - warmup;
  if (rest <= 0) return base_lr;
  return base_lr * std::max(0.0, static_cast<double>(total_steps - step) / static_cast<double>(rest));
}

}  // namespace scamrank
