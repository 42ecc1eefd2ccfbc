#pragma once

// Dense building blocks for the small transformer models: parameters with
// gradients, layer norm, GELU, row softmax, dropout masks and AdamW.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scamrank {

using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string n, Mat v) : name(std::move(n)), value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

// N(0, std^2) entries.
Mat random_normal(Eigen::Index rows, Eigen::Index cols, double std, std::mt19937_64& rng);
// Glorot-scaled normal init for a rows x cols weight.
Mat glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

// Sum of all parameter values, weighted by position; cheap change detector.
double checksum(const ParamList& params);
void zero_grads(const ParamList& params);

struct LayerNormCache {
  Mat xhat;
  Eigen::VectorXd inv_std;
};

constexpr double kLayerNormEps = 1e-5;

// Row-wise layer norm with gain g and bias b (both 1 x d).
Mat layer_norm(const Mat& x, const Mat& g, const Mat& b, LayerNormCache& cache);
// Returns dx; accumulates into dg, db.
Mat layer_norm_backward(const Mat& dy, const Mat& g, const LayerNormCache& cache, Mat& dg, Mat& db);

// tanh approximation
Mat gelu(const Mat& x);
Mat gelu_grad(const Mat& x);

void softmax_rows(Mat& m);

// Inverted dropout mask (entries 0 or 1/(1-p)); all ones when p == 0.
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng);

// Sinusoidal position table, len x dim.
Mat sinusoidal_positions(int len, int dim);

struct AdamWConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW(const ParamList& params, AdamWConfig cfg);
  // One update with learning rate `lr` (schedules live outside).
  void step(const ParamList& params, double lr);
  long steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<Mat> m_, v_;
  long t_ = 0;
};

// Linear warmup over the first ceil(warmup_fraction * total) steps, then
// linear decay to zero. `step` is 0-based.
double warmup_linear_lr(double base_lr, long step, long total_steps, double warmup_fraction);

}  // namespace scamrank
