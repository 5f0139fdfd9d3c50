#include "twist/agent/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::agent {

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& s, double lr, const AdamConfig& cfg) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  if (s.m.size() != params.size()) {
    s.m.setZero(params.size());
    s.v.setZero(params.size());
    s.t = 0;
  }
  ++s.t;
  s.m = cfg.beta1 * s.m + (1.0 - cfg.beta1) * grad;
  s.v = cfg.beta2 * s.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, double(s.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, double(s.t));
  params.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + cfg.eps);
}

}  // namespace twist::agent
