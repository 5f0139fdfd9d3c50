#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support/env_configs.hpp"
#include "twist/core/serialize.hpp"
#include "twist/env/env.hpp"
#include "twist/env/rewards.hpp"
#include "twist/env/trajectory_log.hpp"
#include "twist/env/vector_env.hpp"

using namespace twist;
using namespace twist::env;

namespace {

std::vector<Vector3d> random_points(Rng& rng, int n, double scale) {
  std::vector<Vector3d> p(n);
  for (auto& x : p) x = scale * Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return p;
}

JointVector random_action(Rng& rng) {
  JointVector a;
  for (int i = 0; i < kNumJoints; ++i) a[i] = rng.uniform(-1, 1);
  return a;
}

}  // namespace

TEST(Rewards, ContactAllOnKeypoints) {
  Rng rng(1);
  const auto kb = random_points(rng, 8, 0.05), kl = random_points(rng, 8, 0.05);
  const std::vector<Vector3d> left(kb.begin(), kb.begin() + 4), right(kl.begin() + 2, kl.begin() + 6);
  EXPECT_EQ(reward_contact(kb, kl, left, right, 25.0), 8.0);
}

TEST(Rewards, ContactOneTipAway) {
  Rng rng(2);
  const auto kb = random_points(rng, 8, 0.05), kl = random_points(rng, 8, 0.05);
  std::vector<Vector3d> left(kb.begin(), kb.begin() + 4), right(kl.begin(), kl.begin() + 4);
  // Move one fingertip 4 cm away along a direction with no closer keypoint.
  left[0] = kb[0] + Vector3d(0, 0, 1) * 0.04;
  const double d = nearest_distance(kb, left[0]);
  ASSERT_NEAR(d, 0.04, 0.04);  // could be nearer to another point
  EXPECT_NEAR(reward_contact(kb, kl, left, right, 25.0), 7.0 + 1.0 / (1.0 + 25.0 * d), 1e-12);
  // The documented arithmetic case.
  EXPECT_NEAR(7.0 + 1.0 / (1.0 + 25.0 * 0.04), 7.5, 1e-15);
}

TEST(Rewards, ContactMatchesBruteForce) {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto kb = random_points(rng, 8, 0.05), kl = random_points(rng, 8, 0.05);
    const auto left = random_points(rng, 4, 0.08), right = random_points(rng, 4, 0.08);
    double expect = 0.0;
    for (const auto& f : left) {
      double best = INFINITY;
      for (const auto& p : kb) best = std::min(best, (p - f).norm());
      expect += 1.0 / (1.0 + 25.0 * best);
    }
    for (const auto& f : right) {
      double best = INFINITY;
      for (const auto& p : kl) best = std::min(best, (p - f).norm());
      expect += 1.0 / (1.0 + 25.0 * best);
    }
    const double r = reward_contact(kb, kl, left, right, 25.0);
    EXPECT_NEAR(r, expect, 1e-12);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 8.0);
  }
}

TEST(Rewards, ContactMonotoneInDistance) {
  Rng rng(4);
  const auto kb = random_points(rng, 8, 0.05), kl = random_points(rng, 8, 0.05);
  auto left = random_points(rng, 4, 0.05), right = random_points(rng, 4, 0.05);
  double prev = reward_contact(kb, kl, left, right, 25.0);
  const Vector3d far_dir = Vector3d(1, 1, 1).normalized();
  for (int k = 0; k < 50; ++k) {
    left[1] += 0.01 * far_dir;  // away from every keypoint once far enough
    const double r = reward_contact(kb, kl, left, right, 25.0);
    if (k > 10) EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Rewards, ContactEmptySetThrows) {
  std::vector<Vector3d> none, one{Vector3d::Zero()};
  EXPECT_THROW(reward_contact(none, one, one, one, 25.0), std::invalid_argument);
}

TEST(Rewards, Pose) {
  const Vector3d x(0.3, -0.2, 0.9);
  EXPECT_EQ(reward_pose(x, x), 0.0);
  EXPECT_NEAR(reward_pose(Vector3d::UnitX(), Vector3d::UnitY()), -kPi / 2, 1e-12);
  EXPECT_NEAR(reward_pose(Vector3d::UnitX(), -Vector3d::UnitX()), -kPi, 1e-12);
  EXPECT_THROW(reward_pose(Vector3d::Zero(), Vector3d::UnitX()), std::invalid_argument);
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vector3d a = rng.unit_vector(), b = rng.unit_vector();
    const Matrix3d r = Eigen::AngleAxisd(rng.uniform(0, 6), rng.unit_vector()).toRotationMatrix();
    const double p = reward_pose(a, b);
    EXPECT_LE(p, 0.0);
    EXPECT_GE(p, -kPi);
    EXPECT_NEAR(reward_pose(r * a, r * b), p, 1e-9);
    EXPECT_NEAR(p, -std::acos(std::clamp(a.dot(b), -1.0, 1.0)), 1e-7);
  }
}

TEST(Rewards, Regularizers) {
  JointVector tau = JointVector::Constant(2.0), qd = JointVector::Zero(), a = JointVector::Constant(0.5);
  EXPECT_EQ(reward_regularizers(tau, qd, a).work, 0.0);
  EXPECT_EQ(reward_regularizers(tau, qd, JointVector::Zero()).action, 0.0);
  EXPECT_EQ(reward_regularizers(tau, qd, a).action, 8.0);
  qd.setConstant(-0.5);
  EXPECT_NEAR(reward_regularizers(tau, qd, a).work, 32.0, 1e-12);
}

TEST(Rewards, TotalArithmetic) {
  const RewardWeights w;
  EXPECT_EQ(total_reward({}, w), 0.0);
  RewardTerms t;
  t.contact = 8.0;
  EXPECT_EQ(total_reward(t, w), 20.0);
  t = {};
  t.twist = 0.01;
  EXPECT_NEAR(total_reward(t, w), 5.0, 1e-12);
}

TEST(Rewards, TwistTelescopes) {
  Rng rng(6);
  double theta = rng.uniform(-3, 3);
  const double start = theta;
  double sum = 0.0;
  for (int k = 0; k < 300; ++k) {
    const double next = theta + rng.normal(0.0, 0.05);
    sum += reward_twist(theta, next);
    theta = next;
  }
  EXPECT_NEAR(sum, theta - start, 1e-12);
}

TEST(Config, JsonRoundTripAndHash) {
  EnvConfig c;
  c.dr.object_mass = {0.04, 0.09};
  c.rewards.contact = 0.25;
  EnvConfig d;
  merge_json(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
  EXPECT_EQ(config_hash(d), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(EnvConfig{}));
}

TEST(Config, UnknownKeyRejectedWithPath) {
  EnvConfig c;
  try {
    merge_json(c, nlohmann::json{{"dr", {{"objekt_mass", 1}}}});
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("env.dr.objekt_mass"), std::string::npos) << e.what();
  }
}

TEST(Config, ValidationRejectsBadRanges) {
  EnvConfig c;
  c.dr.object_mass = {0.1, 0.03};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.dr.frame_lag_prob = 1.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.rewards.action = 1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Env, ParamsInsideRanges) {
  const LidTwistEnv env{EnvConfig{}};
  const auto& dr = env.config().dr;
  const auto& o = env.config().objects;
  Rng rng(7);
  for (int k = 0; k < 20000; ++k) {
    const EpisodeParams p = env.sample_params(rng);
    ASSERT_TRUE(dr.object_mass.contains(p.mass));
    ASSERT_TRUE(dr.object_friction.contains(p.friction));
    ASSERT_TRUE(dr.hand_friction.contains(p.hand_friction));
    ASSERT_TRUE(dr.object_shape_scale.contains(p.shape_scale));
    ASSERT_TRUE(dr.p_gain_scale.contains(p.kp_scale));
    ASSERT_TRUE(dr.d_gain_scale.contains(p.kd_scale));
    ASSERT_TRUE(dr.brake_breakaway.contains(p.brake.breakaway_torque));
    const double dia = 2 * p.base_geom.radius;
    ASSERT_GE(dia, o.base_diameter_range.lo * dr.object_shape_scale.lo - 1e-15);
    ASSERT_LE(dia, o.base_diameter_range.hi * dr.object_shape_scale.hi + 1e-15);
  }
}

TEST(Env, SingleObjectDimensions) {
  EnvConfig c;
  c.objects.kind = ObjectSet::kSingle;
  c.dr.object_shape_scale = {1.0, 1.0};
  const LidTwistEnv env(c);
  Rng rng(8);
  const EpisodeParams p = env.sample_params(rng);
  EXPECT_NEAR(2 * p.base_geom.radius, 0.084, 1e-15);
  EXPECT_NEAR(p.base_geom.height, 0.060, 1e-15);
  EXPECT_NEAR(2 * p.lid_geom.radius, 0.067, 1e-15);
  EXPECT_NEAR(p.lid_geom.height, 0.026, 1e-15);
}

TEST(Env, DegenerateRandomizationGivesIdenticalResets) {
  const LidTwistEnv env(testing_support::deterministic_config());
  const EnvState a = env.reset_episode(Rng(1)), b = env.reset_episode(Rng(99));
  EXPECT_EQ(to_bytes(a.bottle), to_bytes(b.bottle));
  EXPECT_EQ(a.hand.q, b.hand.q);
}

TEST(Env, ResetSettlesAboveThreshold) {
  const LidTwistEnv env{EnvConfig{}};
  for (int k = 0; k < 20; ++k) {
    const EnvState s = env.reset_episode(Rng::stream(3, k));
    EXPECT_EQ(env.check_termination(s), DoneReason::kNone);
    EXPECT_EQ(s.step, 0);
    EXPECT_EQ(s.ema, JointVector::Zero());
  }
}

TEST(Env, NoiseFreeObservationIsGroundTruth) {
  const LidTwistEnv env(testing_support::deterministic_config());
  EnvState s = env.reset_episode(Rng(2));
  PolicyObservation o;
  PrivilegedObservation p;
  env.build_observation(s, o, p);
  ASSERT_EQ(o.values.size(), kPolicyObsDim);
  EXPECT_EQ(o.values, p.values.head(kPolicyObsDim));
  EXPECT_EQ(p.values.size(), privileged_obs_dim(env.config().keypoints_per_link));
}

TEST(Env, NoVisionZeroesKeypoints) {
  EnvConfig c = testing_support::deterministic_config();
  c.vision = false;
  const LidTwistEnv env(c);
  EnvState s = env.reset_episode(Rng(2));
  PolicyObservation o;
  PrivilegedObservation p;
  env.build_observation(s, o, p);
  EXPECT_TRUE(o.values.segment<6>(kObsBase).isZero(0.0));
  EXPECT_FALSE(p.values.segment<6>(kObsBase).isZero(0.0));
}

TEST(Env, FrameLagRepeatsObservation) {
  EnvConfig c = testing_support::deterministic_config();
  c.dr.frame_lag_prob = 1.0;
  c.dr.joint_obs_noise = 0.04;
  const LidTwistEnv env(c);
  EnvState s = env.reset_episode(Rng(2));
  Transition tr;
  Rng rng(3);
  env.step(s, random_action(rng), tr);
  const Eigen::VectorXd first = tr.obs.values;
  for (int k = 0; k < 10; ++k) {
    env.step(s, random_action(rng), tr);
    EXPECT_EQ(tr.obs.values, first);
  }
}

TEST(Env, KeypointNoiseStd) {
  EnvConfig c = testing_support::deterministic_config();
  c.dr.keypoint_obs_noise = 0.02;
  const LidTwistEnv env(c);
  EnvState s = env.reset_episode(Rng(2));
  PolicyObservation o;
  PrivilegedObservation p;
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    env.build_observation(s, o, p);
    const double e = o.values[kObsBase] - p.values[kObsBase];
    sum += e;
    sq += e * e;
  }
  const double mean = sum / n;
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.02, 0.0005);
}

TEST(Env, RandomForce) {
  EnvConfig c = testing_support::deterministic_config();
  const LidTwistEnv env(c);
  EnvState s = env.reset_episode(Rng(2));
  s.random_force.setZero();
  for (int k = 0; k < 50; ++k) EXPECT_FALSE(env.apply_random_force(s));
  EXPECT_TRUE(s.random_force.isZero(0.0));

  c.dr.random_force.probability = 1.0;
  const LidTwistEnv always(c);
  s.params.mass = 0.05;
  EXPECT_TRUE(always.apply_random_force(s));
  EXPECT_NEAR(s.random_force.norm(), 0.1, 1e-12);

  s.random_force = Vector3d(0.3, -0.2, 0.1);
  const Vector3d before = s.random_force;
  env.apply_random_force(s);
  EXPECT_NEAR((s.random_force - 0.99 * before).norm(), 0.0, 1e-15);
}

TEST(Env, Termination) {
  const LidTwistEnv env(testing_support::deterministic_config());
  EnvState s = env.reset_episode(Rng(2));
  EXPECT_EQ(env.check_termination(s), DoneReason::kNone);
  EnvState low = s;
  low.bottle.root.position.z() = env.palm_height() - env.config().z_min_below_palm - 0.01;
  EXPECT_EQ(env.check_termination(low), DoneReason::kLowZ);
  EnvState late = s;
  late.step = env.config().horizon;
  EXPECT_EQ(env.check_termination(late), DoneReason::kTimeout);
  EnvState tilted = s;
  tilted.step = static_cast<int>(std::lround(env.config().align_time / env.config().control_dt));
  tilted.aligned_once = false;
  tilted.bottle.root.orientation =
      Quaterniond(Eigen::AngleAxisd(0.6, Vector3d::UnitZ())) * tilted.bottle.root.orientation;
  EXPECT_EQ(env.check_termination(tilted), DoneReason::kAlignFail);
  tilted.aligned_once = true;
  EXPECT_EQ(env.check_termination(tilted), DoneReason::kNone);
}

TEST(Env, ZeroActionRestsStill) {
  const LidTwistEnv env(testing_support::deterministic_config());
  EnvState s = env.reset_episode(Rng(2));
  Transition tr;
  for (int k = 0; k < 20; ++k) {
    env.step(s, JointVector::Zero(), tr);
    EXPECT_EQ(tr.reward_terms.twist, 0.0);
    EXPECT_FALSE(tr.done);
  }
}

TEST(Env, RewardTotalIsWeightedSum) {
  const LidTwistEnv env{EnvConfig{}};
  EnvState s = env.reset_episode(Rng(4));
  Transition tr;
  Rng rng(5);
  for (int k = 0; k < 30 && !tr.done; ++k) {
    env.step(s, random_action(rng), tr);
    EXPECT_NEAR(tr.reward_total, total_reward(tr.reward_terms, env.config().rewards), 1e-9);
    EXPECT_EQ(tr.done, tr.done_reason != DoneReason::kNone);
  }
}

TEST(Env, ActionLagExecutesPreviousAction) {
  EnvConfig c = testing_support::deterministic_config();
  c.dr.action_lag_prob = 1.0;
  const LidTwistEnv env(c);
  const EnvState s0 = env.reset_episode(Rng(2));
  Rng rng(3);
  const JointVector a0 = random_action(rng), a1 = random_action(rng);
  // Lagged run: a0 then a1 executes a0 twice.
  EnvState lagged = s0;
  Transition tr;
  env.step(lagged, a0, tr);
  env.step(lagged, a1, tr);
  EnvConfig plain_cfg = c;
  plain_cfg.dr.action_lag_prob = 0.0;
  const LidTwistEnv plain(plain_cfg);
  EnvState ref = s0;
  plain.step(ref, a0, tr);
  plain.step(ref, a0, tr);
  EXPECT_EQ(lagged.hand.target, ref.hand.target);
}

TEST(Env, ScriptedTwistTurnsLooseLid) {
  EnvConfig c = testing_support::deterministic_config();
  c.objects.kind = ObjectSet::kSingle;
  c.dr.brake_breakaway = {1e-5, 1e-5};
  const LidTwistEnv env(c);
  EnvState s = env.reset_episode(Rng(1));
  Transition tr;
  double sum = 0.0;
  // Left thumb sweeps across the base while the right hand holds the lid.
  JointVector a = JointVector::Zero();
  a[13] = -1.0;
  for (int k = 0; k < 15; ++k) {
    env.step(s, a, tr);
    sum += tr.reward_terms.twist;
    ASSERT_FALSE(tr.done);
  }
  EXPECT_GT(sum, 0.1);
}

TEST(Env, EnvStepIsPure) {
  const LidTwistEnv env{EnvConfig{}};
  const EnvState s = env.reset_episode(Rng(4));
  const JointVector a = JointVector::Constant(0.3);
  const auto [s1, t1] = env.env_step(s, a);
  const auto [s2, t2] = env.env_step(s, a);
  EXPECT_EQ(to_bytes(s1), to_bytes(s2));
  EXPECT_EQ(t1.obs.values, t2.obs.values);
  EXPECT_EQ(t1.reward_total, t2.reward_total);
}

TEST(VectorEnv, SingleEnvEqualsEnvStep) {
  const EnvConfig c;
  VectorEnv v(c, 1, 17, 1);
  v.reset();
  EnvState s = v.state(0);
  Rng rng(1);
  VectorStep out;
  Transition tr;
  for (int k = 0; k < 20; ++k) {
    const JointVector a = random_action(rng);
    v.step(a, out);
    v.env().step(s, a, tr);
    ASSERT_EQ(out.transitions[0].reward_total, tr.reward_total);
    ASSERT_EQ(out.transitions[0].obs.values, tr.obs.values);
    if (tr.done) break;
  }
}

TEST(VectorEnv, ThreadCountDoesNotMatter) {
  const EnvConfig c;
  VectorEnv seq(c, 16, 5, 1), par(c, 16, 5, 4);
  seq.reset();
  par.reset();
  Rng rng(2);
  VectorStep a, b;
  for (int k = 0; k < 40; ++k) {
    Eigen::MatrixXd act(kNumJoints, 16);
    for (Eigen::Index i = 0; i < act.size(); ++i) act.data()[i] = rng.uniform(-1, 1);
    seq.step(act, a);
    par.step(act, b);
    ASSERT_EQ(a.rewards, b.rewards);
    ASSERT_EQ(a.obs, b.obs);
    ASSERT_EQ(a.priv_obs, b.priv_obs);
    ASSERT_EQ(a.dones, b.dones);
  }
}

TEST(VectorEnv, AutoResetKeepsTerminalTransition) {
  EnvConfig c;
  c.horizon = 3;
  VectorEnv v(c, 2, 5, 1);
  v.reset();
  VectorStep out;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(kNumJoints, 2);
  for (int k = 0; k < 3; ++k) v.step(zero, out);
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(out.dones[i]);
    EXPECT_EQ(out.transitions[i].done_reason, DoneReason::kTimeout);
    EXPECT_EQ(v.state(i).step, 0);
    EXPECT_EQ(out.obs.col(i), v.state(i).last_policy_obs);
    EXPECT_NE(out.transitions[i].obs.values, out.obs.col(i));
  }
  EXPECT_EQ(out.finished.size(), 2u);
}

TEST(VectorEnv, SaveLoadContinuesIdentically) {
  const EnvConfig c;
  VectorEnv v(c, 4, 9, 1);
  v.reset();
  Rng rng(3);
  VectorStep out, out2;
  Eigen::MatrixXd act(kNumJoints, 4);
  for (int k = 0; k < 5; ++k) {
    for (Eigen::Index i = 0; i < act.size(); ++i) act.data()[i] = rng.uniform(-1, 1);
    v.step(act, out);
  }
  VectorEnv w(c, 4, 9, 1);
  w.load(v.save());
  for (int k = 0; k < 10; ++k) {
    for (Eigen::Index i = 0; i < act.size(); ++i) act.data()[i] = rng.uniform(-1, 1);
    v.step(act, out);
    w.step(act, out2);
    ASSERT_EQ(out.rewards, out2.rewards);
    ASSERT_EQ(out.obs, out2.obs);
  }
}

TEST(TrajectoryLog, RoundTrip) {
  const LidTwistEnv env{EnvConfig{}};
  EnvState s = env.reset_episode(Rng(4));
  std::ostringstream os;
  TrajectoryWriter w(os);
  w.header(env.config(), 4, s, {{"note", "x"}});
  Rng rng(6);
  Transition tr;
  std::vector<JointVector> actions;
  for (int k = 0; k < 5; ++k) {
    actions.push_back(random_action(rng));
    env.step(s, actions.back(), tr);
    w.step(actions.back(), tr, s);
  }
  w.summary({{"steps", 5}});
  std::istringstream is(os.str());
  const TrajectoryLog log = read_trajectory(is);
  EXPECT_EQ(log.seed, 4u);
  EXPECT_EQ(log.config_hash, hash_hex(config_hash(env.config())));
  ASSERT_EQ(log.steps.size(), 5u);
  EXPECT_EQ(log.steps[3].action, actions[3]);
  EXPECT_EQ(log.steps[4].state, fingerprint(s));
  ASSERT_TRUE(log.summary);
}

TEST(TrajectoryLog, MalformedLineReportsLineNumber) {
  std::istringstream is("{\"type\":\"header\"}\nnot json\n");
  try {
    read_trajectory(is);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}
