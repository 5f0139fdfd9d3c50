#pragma once

#include <concepts>
#include <cstdint>
#include <type_traits>

#include <Eigen/Core>

namespace twist::agent {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr,
               const AdamConfig& cfg = {});

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, AdamState>
void visit(Ar& ar, S& s) {
  ar.io(s.m);
  ar.io(s.v);
  ar.io(s.t);
}

}  // namespace twist::agent
