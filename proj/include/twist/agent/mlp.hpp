#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "twist/core/rng.hpp"

namespace twist::agent {

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Fully connected network: affine + ELU on every hidden layer, linear
// output. Parameters live in one flat vector, layer by layer, each layer
// its weight matrix (column-major, out x in) followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, std::vector<int> hidden, int output_dim);

  // Gaussian weights with std gain / sqrt(fan_in); output layer scaled by
  // `output_gain`. Biases zero.
  void init(Rng& rng, double output_gain = 1.0);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<int> hidden() const { return {sizes_.begin() + 1, sizes_.end() - 1}; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(int l) const;
  Eigen::Map<const Eigen::VectorXd> bias(int l) const;
  Eigen::Map<Eigen::MatrixXd> weight(int l);
  Eigen::Map<Eigen::VectorXd> bias(int l);

  // Activations kept by forward for backward; column per sample.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const;

  // Accumulates dL/dparams into `grad` (same layout as params) given
  // dL/doutput; returns dL/dinput when `grad_input` is set.
  void backward(const Cache& cache, const Eigen::MatrixXd& upstream, Eigen::VectorXd& grad,
                Eigen::MatrixXd* grad_input = nullptr) const;

 private:
  std::vector<int> sizes_{0};
  std::vector<Eigen::Index> offsets_;  // start of each layer's weights
  Eigen::VectorXd params_;
};

}  // namespace twist::agent
