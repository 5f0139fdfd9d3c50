#include "twist/agent/gae.hpp"

#include <stdexcept>

namespace twist::agent {

GaeResult compute_gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values, const Eigen::MatrixXd& dones,
                      double gamma, double lambda) {
  const Eigen::Index T = rewards.rows(), N = rewards.cols();
  if (values.rows() != T + 1 || values.cols() != N || dones.rows() != T || dones.cols() != N)
    throw std::invalid_argument("compute_gae: expected rewards/dones T x N and values (T+1) x N");
  GaeResult out;
  out.advantages.resize(T, N);
  Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(N);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Eigen::RowVectorXd live = Eigen::RowVectorXd::Ones(N) - dones.row(t);
    const Eigen::RowVectorXd delta =
        rewards.row(t) + gamma * live.cwiseProduct(values.row(t + 1)) - values.row(t);
    next = delta + gamma * lambda * live.cwiseProduct(next);
    out.advantages.row(t) = next;
  }
  out.returns = out.advantages + values.topRows(T);
  return out;
}

}  // namespace twist::agent
