#include "twist/agent/normalizer.hpp"

#include <stdexcept>

namespace twist::agent {

void RunningNormalizer::merge(double n, const Eigen::VectorXd& batch_mean, const Eigen::VectorXd& batch_var) {
  if (n <= 0.0) return;
  const double total = count + n;
  const Eigen::VectorXd delta = batch_mean - mean;
  const Eigen::VectorXd m2 = var * count + batch_var * n + delta.cwiseAbs2() * (count * n / total);
  mean += delta * (n / total);
  var = m2 / total;
  count = total;
}

void RunningNormalizer::update(const Eigen::MatrixXd& batch) {
  if (batch.rows() != dim()) throw std::invalid_argument("RunningNormalizer::update: dimension mismatch");
  if (batch.cols() == 0) return;
  const Eigen::VectorXd m = batch.rowwise().mean();
  const Eigen::VectorXd v = (batch.colwise() - m).cwiseAbs2().rowwise().mean();
  merge(static_cast<double>(batch.cols()), m, v);
}

Eigen::VectorXd RunningNormalizer::stddev() const { return var.cwiseSqrt().cwiseMax(1e-6); }

Eigen::MatrixXd RunningNormalizer::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != dim()) throw std::invalid_argument("RunningNormalizer::apply: dimension mismatch");
  if (count == 0.0) return x;
  return (x.colwise() - mean).array().colwise() / stddev().array();
}

Eigen::MatrixXd RunningNormalizer::unapply(const Eigen::MatrixXd& y) const {
  if (y.rows() != dim()) throw std::invalid_argument("RunningNormalizer::unapply: dimension mismatch");
  if (count == 0.0) return y;
  return (y.array().colwise() * stddev().array()).matrix().colwise() + mean;
}

}  // namespace twist::agent
