#include <gtest/gtest.h>

#include <cmath>

#include "support/bandit.hpp"
#include "support/oracles.hpp"
#include "twist/agent/adam.hpp"
#include "twist/agent/checkpoint.hpp"
#include "twist/agent/gae.hpp"
#include "twist/agent/gaussian_policy.hpp"
#include "twist/agent/mlp.hpp"
#include "twist/agent/normalizer.hpp"
#include "twist/agent/ppo.hpp"
#include "twist/agent/trainer.hpp"
#include "twist/core/serialize.hpp"

using namespace twist;
using namespace twist::agent;

namespace {

Mlp random_mlp(int in, std::vector<int> hidden, int out, std::uint64_t seed) {
  Mlp m(in, std::move(hidden), out);
  Rng rng(seed);
  m.init(rng);
  // Non-zero biases so every path is exercised.
  for (int l = 0; l < m.num_layers(); ++l)
    for (Eigen::Index i = 0; i < m.bias(l).size(); ++i) m.bias(l)[i] = 0.3 * rng.normal();
  return m;
}

}  // namespace

TEST(Mlp, ZeroParamsGiveZeroOutput) {
  Mlp m(5, {7, 3}, 2);
  m.params().setZero();
  EXPECT_TRUE(m.forward(Eigen::MatrixXd::Random(5, 4)).isZero(0.0));
}

TEST(Mlp, EluIdentityNet) {
  // 1 -> 1 hidden -> 1 with unit weights: output is ELU(x).
  Mlp m(1, {1}, 1);
  m.params().setZero();
  m.weight(0)(0, 0) = 1.0;
  m.weight(1)(0, 0) = 1.0;
  EXPECT_NEAR(m.forward(Eigen::MatrixXd::Constant(1, 1, -1.0))(0, 0), std::exp(-1.0) - 1.0, 1e-15);
}

TEST(Mlp, MatchesLoopOracle) {
  const Mlp m = random_mlp(9, {16, 16, 8}, 4, 3);
  Rng rng(1);
  Eigen::MatrixXd x(9, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  EXPECT_LT((m.forward(x) - oracle::mlp_forward(m, x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, ShapeMismatchThrows) {
  const Mlp m(3, {4}, 2);
  EXPECT_THROW(m.forward(Eigen::MatrixXd::Zero(4, 1)), std::invalid_argument);
}

TEST(Mlp, LinearLayerGradientIsOuterProduct) {
  Mlp m(3, {}, 2);
  Rng rng(2);
  m.init(rng);
  const Eigen::MatrixXd x = Eigen::Vector3d(0.5, -1.0, 2.0);
  const Eigen::MatrixXd up = Eigen::Vector2d(0.3, -0.7);
  Mlp::Cache cache;
  m.forward(x, cache);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.params().size());
  m.backward(cache, up, g);
  const Eigen::MatrixXd gw = Eigen::Map<const Eigen::MatrixXd>(g.data(), 2, 3);
  EXPECT_LT((gw - up * x.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((g.tail(2) - up).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mlp, ZeroUpstreamZeroGradient) {
  const Mlp m = random_mlp(4, {8}, 3, 5);
  Mlp::Cache cache;
  m.forward(Eigen::MatrixXd::Random(4, 2), cache);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.params().size());
  m.backward(cache, Eigen::MatrixXd::Zero(3, 2), g);
  EXPECT_TRUE(g.isZero(0.0));
}

TEST(Mlp, FiniteDifferenceGradients) {
  Rng rng(7);
  const auto actor = oracle::mlp_gradient_check(random_mlp(12, {16, 16, 8}, 5, 11), rng, 100);
  const auto critic = oracle::mlp_gradient_check(random_mlp(12, {32, 32, 32}, 1, 12), rng, 100);
  EXPECT_LT(actor.max_rel_error, 1e-5);
  EXPECT_LT(critic.max_rel_error, 1e-5);
}

TEST(Gaussian, StandardNormalLogProb) {
  const Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(32, 1), a = Eigen::MatrixXd::Zero(32, 1);
  EXPECT_NEAR(gaussian_log_prob(mean, Eigen::VectorXd::Zero(32), a)[0], -16.0 * std::log(2 * kPi), 1e-12);
}

TEST(Gaussian, LogProbMatchesDensity) {
  Rng rng(3);
  Eigen::MatrixXd mean(3, 1), a(3, 1);
  Eigen::VectorXd ls(3);
  double expect = 0.0;
  for (int i = 0; i < 3; ++i) {
    mean(i, 0) = rng.normal();
    a(i, 0) = rng.normal();
    ls[i] = rng.uniform(-1, 1);
    const double s = std::exp(ls[i]);
    expect += std::log(std::exp(-0.5 * std::pow((a(i, 0) - mean(i, 0)) / s, 2)) / (s * std::sqrt(2 * kPi)));
  }
  EXPECT_NEAR(gaussian_log_prob(mean, ls, a)[0], expect, 1e-12);
}

TEST(Gaussian, LogStdClamped) {
  GaussianPolicy p(3, {4}, 2, 0.0);
  p.log_std << -9.0, 5.0;
  const Eigen::VectorXd e = p.effective_log_std();
  EXPECT_EQ(e[0], -5.0);
  EXPECT_EQ(e[1], 2.0);
}

TEST(Gaussian, SampleMoments) {
  GaussianPolicy p(1, {2}, 2, 0.0);
  p.log_std << std::log(0.5), std::log(2.0);
  const int n = 100000;
  Eigen::MatrixXd mean(2, n);
  mean.row(0).setConstant(0.3);
  mean.row(1).setConstant(-1.0);
  Rng rng(4);
  const Eigen::MatrixXd s = p.sample(mean, rng);
  const double sd[2] = {0.5, 2.0}, mu[2] = {0.3, -1.0};
  for (int r = 0; r < 2; ++r) {
    const double m = s.row(r).mean();
    const double var = (s.row(r).array() - m).square().mean();
    EXPECT_NEAR(m, mu[r], 3 * sd[r] / std::sqrt(n));
    // Std error of the sample variance of a normal: sigma^2 sqrt(2/n).
    EXPECT_NEAR(var, sd[r] * sd[r], 3 * sd[r] * sd[r] * std::sqrt(2.0 / n));
  }
}

TEST(Gaussian, KlZeroForIdentical) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 3);
  const Eigen::VectorXd ls = Eigen::VectorXd::Constant(4, -0.3);
  EXPECT_TRUE(gaussian_kl(m, ls, m, ls).isZero(1e-15));
}

TEST(Gae, SingleStep) {
  const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, 1.0), d = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd v(2, 1);
  v << 0.5, 0.0;
  const GaeResult g = compute_gae(r, v, d, 0.99, 0.95);
  EXPECT_NEAR(g.advantages(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.returns(0, 0), 1.0, 1e-15);
}

TEST(Gae, OraclesOnRandomRollouts) {
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const auto ro = oracle::random_rollout(rng, 16, 4, 0.1);
    const GaeResult g1 = compute_gae(ro.rewards, ro.values, ro.dones, 0.99, 1.0);
    EXPECT_LT((g1.advantages - oracle::gae_lambda1(ro.rewards, ro.values, ro.dones, 0.99)).cwiseAbs().maxCoeff(),
              1e-10);
    const GaeResult g0 = compute_gae(ro.rewards, ro.values, ro.dones, 0.99, 0.0);
    EXPECT_LT((g0.advantages - oracle::gae_lambda0(ro.rewards, ro.values, ro.dones, 0.99)).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LT((g1.returns - (g1.advantages + ro.values.topRows(16))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gae, DoneTruncates) {
  Rng rng(10);
  auto ro = oracle::random_rollout(rng, 8, 1, 0.0);
  ro.dones(3, 0) = 1.0;
  const GaeResult g = compute_gae(ro.rewards, ro.values, ro.dones, 0.99, 0.95);
  EXPECT_NEAR(g.advantages(3, 0), ro.rewards(3, 0) - ro.values(3, 0), 1e-15);
}

TEST(Gae, ShapeMismatchThrows) {
  EXPECT_THROW(compute_gae(Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(4, 2), 0.99,
                           0.95),
               std::invalid_argument);
}

TEST(Normalizer, FreshIsIdentity) {
  const RunningNormalizer n(3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  EXPECT_EQ(n.apply(x), x);
}

TEST(Normalizer, ConstantStreamNormalizesToZero) {
  RunningNormalizer n(2);
  for (int k = 0; k < 5; ++k) n.update(Eigen::MatrixXd::Constant(2, 10, 3.5));
  EXPECT_TRUE(n.apply(Eigen::MatrixXd::Constant(2, 1, 3.5)).isZero(0.0));
}

TEST(Normalizer, MergeEqualsTwoPass) {
  Rng rng(12);
  Eigen::MatrixXd a(3, 37), b(3, 91);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 5 + 2 * rng.normal();
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = -1 + 0.5 * rng.normal();
  RunningNormalizer n(3);
  n.update(a);
  n.update(b);
  Eigen::MatrixXd all(3, 128);
  all << a, b;
  const Eigen::VectorXd mean = all.rowwise().mean();
  const Eigen::VectorXd var = (all.colwise() - mean).array().square().rowwise().mean();
  EXPECT_LT((n.mean - mean).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((n.var - var).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((n.unapply(n.apply(a)) - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ppo, AdaptiveLearningRateBounds) {
  PpoConfig c;
  Rng rng(13);
  double lr = c.learning_rate;
  for (int k = 0; k < 10000; ++k) {
    lr = adapt_learning_rate(lr, rng.uniform(0, 0.1), c);
    ASSERT_GE(lr, c.lr_min);
    ASSERT_LE(lr, c.lr_max);
  }
  EXPECT_EQ(adapt_learning_rate(1e-3, 0.1, c), 5e-4);
  EXPECT_EQ(adapt_learning_rate(1e-3, 0.001, c), 1.5e-3);
  EXPECT_EQ(adapt_learning_rate(1e-3, 0.016, c), 1e-3);
}

TEST(Ppo, ConfigValidationAndJson) {
  PpoConfig c;
  c.minibatch = c.horizon * c.num_envs + 1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.gamma = 1.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.clip = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.epochs = 3;
  PpoConfig d;
  merge_json(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
  EXPECT_THROW(merge_json(d, nlohmann::json{{"horizn", 3}}), std::exception);
}

TEST(Ppo, ZeroAdvantagesLeaveActorUnchanged) {
  // One env, terminal rewards equal to the critic's prediction after GAE
  // normalization: all advantages are equal, hence zero after normalization.
  PpoConfig c = twist::testing::bandit_ppo_config();
  c.num_envs = 8;
  c.horizon = 4;
  c.minibatch = 8;
  PpoAgent agent(1, 1, 1, c, 3);
  RolloutBuffer buf;
  buf.allocate(4, 8, 1, 1, 1);
  buf.obs.setZero();
  buf.critic_obs.setZero();
  Rng rng(1);
  for (Eigen::Index i = 0; i < buf.actions.size(); ++i) buf.actions.data()[i] = rng.normal();
  buf.means.setZero();
  buf.behaviour_log_std = agent.actor().effective_log_std();
  buf.log_probs = gaussian_log_prob(buf.means, buf.behaviour_log_std, buf.actions);
  buf.values.setZero();
  buf.rewards.setConstant(1.0);
  buf.dones.setOnes();
  buf.bootstrap.setZero();
  const Eigen::VectorXd actor_before = agent.actor().net.params();
  const Eigen::VectorXd log_std_before = agent.actor().log_std;
  agent.update(buf);
  EXPECT_EQ(agent.actor().net.params(), actor_before);
  EXPECT_EQ(agent.actor().log_std, log_std_before);
}

TEST(Ppo, ClippedSurrogateNeverExceedsUnclipped) {
  Rng rng(14);
  for (int k = 0; k < 10000; ++k) {
    const double ratio = std::exp(rng.normal(0, 0.5)), adv = rng.normal();
    const double clipped = std::clamp(ratio, 0.8, 1.2);
    EXPECT_LE(std::min(ratio * adv, clipped * adv), ratio * adv);
  }
}

TEST(Ppo, BanditConverges) {
  const PpoConfig c = twist::testing::bandit_ppo_config();
  twist::testing::QuadraticBandit env(c.num_envs, 0.3);
  PpoAgent agent(1, 1, 1, c, 1);
  Trainer trainer(agent, env);
  trainer.start();
  for (int u = 0; u < 200; ++u) trainer.iterate();
  EXPECT_NEAR(agent.mean_action(Eigen::MatrixXd::Zero(1, 1))(0, 0), 0.3, 0.05);
}

TEST(Ppo, DeterministicUpdates) {
  const PpoConfig c = twist::testing::bandit_ppo_config();
  auto run = [&] {
    twist::testing::QuadraticBandit env(c.num_envs, -0.2);
    PpoAgent agent(1, 1, 1, c, 9);
    Trainer trainer(agent, env);
    trainer.start();
    for (int u = 0; u < 10; ++u) trainer.iterate();
    return agent.state_hash();
  };
  EXPECT_EQ(run(), run());
}

TEST(Ppo, NonFiniteRewardAbortsAndRollsBack) {
  const PpoConfig c = twist::testing::bandit_ppo_config();
  PpoAgent agent(1, 1, 1, c, 3);
  RolloutBuffer buf;
  buf.allocate(c.horizon, c.num_envs, 1, 1, 1);
  buf.obs.setZero();
  buf.critic_obs.setZero();
  buf.actions.setZero();
  buf.means.setZero();
  buf.behaviour_log_std = agent.actor().effective_log_std();
  buf.log_probs = gaussian_log_prob(buf.means, buf.behaviour_log_std, buf.actions);
  buf.values.setZero();
  buf.rewards.setZero();
  buf.rewards(0, 0) = NAN;
  buf.dones.setOnes();
  buf.bootstrap.setZero();
  const auto before = agent.state_hash();
  EXPECT_THROW(agent.update(buf), NonFiniteLoss);
  EXPECT_EQ(agent.state_hash(), before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3), g(3);
  g << 2.0, -0.5, 0.0;
  AdamState st;
  adam_step(p, g, st, 0.01);
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Checkpoint, EncodeDecodeRoundTrip) {
  PpoAgent agent(4, 6, 2, twist::testing::bandit_ppo_config(), 5);
  Checkpoint c;
  c.config_hash = "abc123";
  c.meta = {{"k", 1}};
  store_agent(c, agent);
  c.entries["extra"] = std::string("\0\1\2", 3);
  const std::string bytes = encode_checkpoint(c);
  const Checkpoint d = decode_checkpoint(bytes);
  EXPECT_EQ(d.config_hash, c.config_hash);
  EXPECT_EQ(d.meta, c.meta);
  EXPECT_EQ(d.entries, c.entries);
  EXPECT_EQ(encode_checkpoint(d), bytes);
  PpoAgent other(4, 6, 2, twist::testing::bandit_ppo_config(), 77);
  restore_agent(d, other);
  EXPECT_EQ(other.state_hash(), agent.state_hash());
}

TEST(Checkpoint, CorruptionDetected) {
  PpoAgent agent(4, 6, 2, twist::testing::bandit_ppo_config(), 5);
  Checkpoint c;
  store_agent(c, agent);
  std::string bytes = encode_checkpoint(c);
  bytes[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(decode_checkpoint(bytes), std::runtime_error);
  EXPECT_THROW(decode_checkpoint("NOTACKPT"), std::runtime_error);
}

TEST(Checkpoint, ShapeMismatchRejected) {
  PpoAgent agent(4, 6, 2, twist::testing::bandit_ppo_config(), 5);
  Checkpoint c;
  store_agent(c, agent);
  PpoAgent wrong(5, 6, 2, twist::testing::bandit_ppo_config(), 5);
  EXPECT_THROW(restore_agent(c, wrong), std::runtime_error);
}
