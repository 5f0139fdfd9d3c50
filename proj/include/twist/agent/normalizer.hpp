#pragma once

#include <concepts>
#include <type_traits>

#include <Eigen/Core>

namespace twist::agent {

// Streaming per-feature mean and variance (population), merged batch by
// batch with the parallel-moments rule.
struct RunningNormalizer {
  double count = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd var;

  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim) : mean(Eigen::VectorXd::Zero(dim)), var(Eigen::VectorXd::Ones(dim)) {}

  int dim() const { return static_cast<int>(mean.size()); }

  // batch: dim x B.
  void update(const Eigen::MatrixXd& batch);
  void merge(double n, const Eigen::VectorXd& batch_mean, const Eigen::VectorXd& batch_var);

  // (x - mean) / max(std, 1e-6); identity while count is 0.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  // Inverse of apply.
  Eigen::MatrixXd unapply(const Eigen::MatrixXd& y) const;
  Eigen::VectorXd stddev() const;
};

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, RunningNormalizer>
void visit(Ar& ar, S& s) {
  ar.io(s.count);
  ar.io(s.mean);
  ar.io(s.var);
}

}  // namespace twist::agent
