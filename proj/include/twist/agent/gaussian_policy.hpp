#pragma once

#include <vector>

#include "twist/agent/mlp.hpp"

namespace twist::agent {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian whose mean is an MLP of the observation and whose
// log standard deviation is a free parameter vector.
struct GaussianPolicy {
  Mlp net;
  Eigen::VectorXd log_std;

  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, std::vector<int> hidden, int action_dim, double init_log_std = 0.0);

  int action_dim() const { return net.output_dim(); }

  // log_std clamped to [kLogStdMin, kLogStdMax]; throws on non-finite values.
  Eigen::VectorXd effective_log_std() const;
  Eigen::VectorXd stddev() const { return effective_log_std().array().exp(); }

  Eigen::MatrixXd mean(const Eigen::MatrixXd& obs) const { return net.forward(obs); }

  // Samples one action per column: mean + std * N(0, 1).
  Eigen::MatrixXd sample(const Eigen::MatrixXd& mean, Rng& rng) const;

  double entropy() const;
};

// Per-column log density of `actions` under N(mean, exp(log_std)^2).
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& actions);

// Per-column KL(old || new) between diagonal Gaussians.
Eigen::VectorXd gaussian_kl(const Eigen::MatrixXd& mean_old, const Eigen::VectorXd& log_std_old,
                            const Eigen::MatrixXd& mean_new, const Eigen::VectorXd& log_std_new);

}  // namespace twist::agent
