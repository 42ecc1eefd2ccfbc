#include <cmath>

#include "scamrank/oracle.hpp"

namespace scamrank {

LogisticRegression LogisticRegression::fit(const DesignMatrix& m, std::span<const double> targets, int iterations,
                                           double learning_rate, double l2) {
  LogisticRegression lr;
  const std::size_t n = m.rows, d = m.cols;
  lr.weights.assign(d, 0.0);
  lr.mean.assign(d, 0.0);
  lr.scale.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += m.at(r, c);
    double mu = s / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) s2 += (m.at(r, c) - mu) * (m.at(r, c) - mu);
    double sd = std::sqrt(s2 / static_cast<double>(n));
    lr.mean[c] = mu;
    lr.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  std::vector<double> x(n * d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) x[r * d + c] = (m.at(r, c) - lr.mean[c]) / lr.scale[c];

  std::vector<double> grad(d);
  for (int it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double z = lr.bias;
      for (std::size_t c = 0; c < d; ++c) z += lr.weights[c] * x[r * d + c];
      double err = sigmoid(z) - targets[r];
      gb += err;
      for (std::size_t c = 0; c < d; ++c) grad[c] += err * x[r * d + c];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) lr.weights[c] -= learning_rate * (grad[c] * inv + l2 * lr.weights[c]);
    lr.bias -= learning_rate * gb * inv;
  }
  return lr;
}

double LogisticRegression::predict(std::span<const double> values) const {
  double z = bias;
  for (std::size_t c = 0; c < weights.size(); ++c) z += weights[c] * (values[c] - mean[c]) / scale[c];
  return sigmoid(z);
}

}  // namespace scamrank
