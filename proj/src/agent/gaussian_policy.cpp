#include "twist/agent/gaussian_policy.hpp"

#include <cmath>
#include <stdexcept>

#include "twist/core/types.hpp"

namespace twist::agent {

GaussianPolicy::GaussianPolicy(int obs_dim, std::vector<int> hidden, int action_dim, double init_log_std)
    : net(obs_dim, std::move(hidden), action_dim), log_std(Eigen::VectorXd::Constant(action_dim, init_log_std)) {}

Eigen::VectorXd GaussianPolicy::effective_log_std() const {
  if (!log_std.allFinite()) throw std::runtime_error("GaussianPolicy: non-finite log_std");
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::MatrixXd GaussianPolicy::sample(const Eigen::MatrixXd& mean, Rng& rng) const {
  const Eigen::VectorXd sd = stddev();
  Eigen::MatrixXd a(mean.rows(), mean.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = mean(i, j) + sd[i] * rng.normal();
  return a;
}

double GaussianPolicy::entropy() const {
  return effective_log_std().sum() + 0.5 * action_dim() * std::log(2.0 * kPi * std::exp(1.0));
}

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& actions) {
  const Eigen::ArrayXd inv_sd = (-log_std).array().exp();
  const Eigen::ArrayXXd z = (actions - mean).array().colwise() * inv_sd;
  const double c = -log_std.sum() - 0.5 * mean.rows() * std::log(2.0 * kPi);
  return (-0.5 * z.square().colwise().sum() + c).matrix().transpose();
}

Eigen::VectorXd gaussian_kl(const Eigen::MatrixXd& mean_old, const Eigen::VectorXd& log_std_old,
                            const Eigen::MatrixXd& mean_new, const Eigen::VectorXd& log_std_new) {
  const Eigen::ArrayXd var_old = (2.0 * log_std_old).array().exp();
  const Eigen::ArrayXd inv_var_new = (-2.0 * log_std_new).array().exp();
  const double per_dim = (log_std_new - log_std_old).sum() + 0.5 * ((var_old * inv_var_new).sum() - mean_old.rows());
  const Eigen::ArrayXXd d = (mean_new - mean_old).array();
  return (0.5 * (d.square().colwise() * inv_var_new).colwise().sum() + per_dim).matrix().transpose();
}

}  // namespace twist::agent
