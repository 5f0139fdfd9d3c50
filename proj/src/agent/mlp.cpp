#include "twist/agent/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::agent {

Mlp::Mlp(int input_dim, std::vector<int> hidden, int output_dim) {
  sizes_.clear();
  sizes_.push_back(input_dim);
  for (int h : hidden) sizes_.push_back(h);
  sizes_.push_back(output_dim);
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_.setZero(total);
}

void Mlp::init(Rng& rng, double output_gain) {
  for (int l = 0; l < num_layers(); ++l) {
    auto w = weight(l);
    const double gain = (l + 1 == num_layers() ? output_gain : std::sqrt(2.0)) / std::sqrt(double(sizes_[l]));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = gain * rng.normal();
    bias(l).setZero();
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int l) const {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int l) const {
  return {params_.data() + offsets_[l] + Eigen::Index(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weight(int l) {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(int l) {
  return {params_.data() + offsets_[l] + Eigen::Index(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Cache scratch;
  return forward(x, scratch);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  cache.inputs.resize(num_layers());
  cache.pre.resize(num_layers());
  Eigen::MatrixXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    cache.inputs[l] = h;
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    cache.pre[l] = z;
    if (l + 1 < num_layers())
      h = z.unaryExpr([](double v) { return elu(v); });
    else
      h = std::move(z);
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& upstream, Eigen::VectorXd& grad,
                   Eigen::MatrixXd* grad_input) const {
  if (grad.size() != params_.size()) grad.setZero(params_.size());
  if (upstream.rows() != output_dim() || cache.pre.size() != static_cast<std::size_t>(num_layers()))
    throw std::invalid_argument("Mlp::backward: shape mismatch");
  Eigen::MatrixXd d = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) d.array() *= cache.pre[l].unaryExpr([](double v) { return elu_grad(v); }).array();
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + Eigen::Index(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]);
    gw.noalias() += d * cache.inputs[l].transpose();
    gb += d.rowwise().sum();
    if (l > 0 || grad_input) d = weight(l).transpose() * d;
  }
  if (grad_input) *grad_input = std::move(d);
}

}  // namespace twist::agent
