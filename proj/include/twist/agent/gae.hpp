#pragma once

#include <Eigen/Core>

namespace twist::agent {

struct GaeResult {
  Eigen::MatrixXd advantages;
  Eigen::MatrixXd returns;
};

// rewards, dones: T x N; values: (T+1) x N with the bootstrap value in the
// last row. delta_t = r_t + gamma (1 - done_t) V_{t+1} - V_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + V.
GaeResult compute_gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values, const Eigen::MatrixXd& dones,
                      double gamma, double lambda);

}  // namespace twist::agent
