#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include <algorithm>
#include <cmath>

#include "twist/agent/gae.hpp"
#include "twist/agent/mlp.hpp"
#include "twist/core/rng.hpp"

namespace twist::oracle {

// Forward pass written with scalar loops over the flat parameter layout
// (per layer: column-major out x in weights, then bias).
inline Eigen::MatrixXd mlp_forward(const agent::Mlp& net, const Eigen::MatrixXd& x) {
  const auto& sizes = net.sizes();
  const double* p = net.params().data();
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double* w = p;
    const double* b = p + in * out;
    Eigen::MatrixXd y(out, h.cols());
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      for (int o = 0; o < out; ++o) {
        double s = b[o];
        for (int i = 0; i < in; ++i) s += w[o + i * out] * h(i, c);
        const bool last = l + 2 == sizes.size();
        y(o, c) = last ? s : (s > 0 ? s : std::exp(s) - 1.0);
      }
    h = y;
    p += in * out + out;
  }
  return h;
}

struct GradCheck {
  double max_rel_error = 0.0;
  int probes = 0;
};

// Loss = sum(c .* net(x)) with fixed random c. Compares the analytic
// gradient with central differences at random parameter and input entries.
inline GradCheck mlp_gradient_check(agent::Mlp net, Rng& rng, int probes, double h = 1e-5) {
  const int batch = 3;
  Eigen::MatrixXd x(net.input_dim(), batch), c(net.output_dim(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.normal();
  auto loss = [&](const agent::Mlp& n, const Eigen::MatrixXd& in) { return (c.array() * n.forward(in).array()).sum(); };

  agent::Mlp::Cache cache;
  net.forward(x, cache);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.params().size());
  Eigen::MatrixXd gx;
  net.backward(cache, c, g, &gx);

  auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-4}); };
  GradCheck out;
  for (int k = 0; k < probes; ++k) {
    double analytic, numeric;
    if (k % 5 == 4) {
      const Eigen::Index i = static_cast<Eigen::Index>(rng.uniform() * x.size());
      Eigen::MatrixXd xp = x, xm = x;
      xp.data()[i] += h;
      xm.data()[i] -= h;
      analytic = gx.data()[i];
      numeric = (loss(net, xp) - loss(net, xm)) / (2 * h);
    } else {
      const Eigen::Index i = static_cast<Eigen::Index>(rng.uniform() * net.params().size());
      agent::Mlp np = net, nm = net;
      np.params()[i] += h;
      nm.params()[i] -= h;
      analytic = g[i];
      numeric = (loss(np, x) - loss(nm, x)) / (2 * h);
    }
    out.max_rel_error = std::max(out.max_rel_error, rel(analytic, numeric));
    ++out.probes;
  }
  return out;
}

// Advantages by explicit sums over the future of each step.
// lambda == 1: discounted rewards until the episode end plus the discounted
// bootstrap if no done intervenes, minus V_t.
inline Eigen::MatrixXd gae_lambda1(const Eigen::MatrixXd& r, const Eigen::MatrixXd& v, const Eigen::MatrixXd& d,
                                   double gamma) {
  const Eigen::Index T = r.rows(), N = r.cols();
  Eigen::MatrixXd a(T, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index t = 0; t < T; ++t) {
      double sum = 0.0, disc = 1.0;
      Eigen::Index k = t;
      bool ended = false;
      for (; k < T; ++k) {
        sum += disc * r(k, i);
        disc *= gamma;
        if (d(k, i) != 0.0) {
          ended = true;
          break;
        }
      }
      if (!ended) sum += disc * v(T, i);
      a(t, i) = sum - v(t, i);
    }
  return a;
}

// lambda == 0: one-step TD residuals.
inline Eigen::MatrixXd gae_lambda0(const Eigen::MatrixXd& r, const Eigen::MatrixXd& v, const Eigen::MatrixXd& d,
                                   double gamma) {
  Eigen::MatrixXd a(r.rows(), r.cols());
  for (Eigen::Index i = 0; i < r.cols(); ++i)
    for (Eigen::Index t = 0; t < r.rows(); ++t) a(t, i) = r(t, i) + gamma * (1.0 - d(t, i)) * v(t + 1, i) - v(t, i);
  return a;
}

struct RandomRollout {
  Eigen::MatrixXd rewards, values, dones;
};

inline RandomRollout random_rollout(Rng& rng, int T, int N, double done_prob) {
  RandomRollout r{Eigen::MatrixXd(T, N), Eigen::MatrixXd(T + 1, N), Eigen::MatrixXd(T, N)};
  for (Eigen::Index i = 0; i < r.rewards.size(); ++i) r.rewards.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < r.values.size(); ++i) r.values.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < r.dones.size(); ++i) r.dones.data()[i] = rng.bernoulli(done_prob) ? 1.0 : 0.0;
  return r;
}

}  // namespace twist::oracle
