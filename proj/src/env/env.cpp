#include "twist/env/env.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::env {

std::string to_string(DoneReason r) {
  switch (r) {
    case DoneReason::kNone: return "none";
    case DoneReason::kTimeout: return "timeout";
    case DoneReason::kLowZ: return "low_z";
    case DoneReason::kAlignFail: return "align_fail";
    case DoneReason::kError: return "error";
  }
  return "none";
}

DoneReason done_reason_from_string(const std::string& s) {
  if (s == "none") return DoneReason::kNone;
  if (s == "timeout") return DoneReason::kTimeout;
  if (s == "low_z") return DoneReason::kLowZ;
  if (s == "align_fail") return DoneReason::kAlignFail;
  if (s == "error") return DoneReason::kError;
  throw std::invalid_argument("unknown done reason '" + s + "'");
}

int privileged_obs_dim(int keypoints_per_link) {
  return kPolicyObsDim + kNumJoints + 3 * kNumFingers + 3 * 2 * keypoints_per_link + 4 + 3 + 3 + 3 + 1 + 3;
}

LidTwistEnv::LidTwistEnv(EnvConfig config) : config_(std::move(config)) {
  validate(config_);
  hand_ = hand::HandModel::build(config_.hand);
  for (int f = 0; f < kNumFingers; ++f)
    canonical_tip_heights_[f] = hand::fingertip_position(hand_, hand_.canonical, f).z();
}

double LidTwistEnv::palm_height() const { return std::max(hand_.palms[0].height, hand_.palms[1].height); }

EpisodeParams LidTwistEnv::sample_params(Rng& rng) const {
  const auto& dr = config_.dr;
  const auto& o = config_.objects;
  EpisodeParams p;
  double base_d = o.base_diameter, base_h = o.base_height, lid_d = o.lid_diameter, lid_h = o.lid_height;
  if (o.kind == ObjectSet::kMulti) {
    base_d = rng.uniform(o.base_diameter_range.lo, o.base_diameter_range.hi);
    base_h = rng.uniform(o.base_height_range.lo, o.base_height_range.hi);
    lid_d = rng.uniform(o.lid_diameter_range.lo, o.lid_diameter_range.hi);
    lid_h = rng.uniform(o.lid_height_range.lo, o.lid_height_range.hi);
  }
  p.shape_scale = rng.uniform(dr.object_shape_scale.lo, dr.object_shape_scale.hi);
  p.base_geom = {0.5 * base_d * p.shape_scale, base_h * p.shape_scale};
  p.lid_geom = {0.5 * lid_d * p.shape_scale, lid_h * p.shape_scale};
  p.mass = rng.uniform(dr.object_mass.lo, dr.object_mass.hi);
  p.friction = rng.uniform(dr.object_friction.lo, dr.object_friction.hi);
  p.hand_friction = rng.uniform(dr.hand_friction.lo, dr.hand_friction.hi);
  p.kp_scale = rng.uniform(dr.p_gain_scale.lo, dr.p_gain_scale.hi);
  p.kd_scale = rng.uniform(dr.d_gain_scale.lo, dr.d_gain_scale.hi);
  p.brake.breakaway_torque = rng.uniform(dr.brake_breakaway.lo, dr.brake_breakaway.hi);
  p.brake.kinetic_torque = config_.brake_kinetic_ratio * p.brake.breakaway_torque;
  p.brake.viscous_coeff = config_.brake_viscous;
  return p;
}

sim::BottleAssembly LidTwistEnv::make_bottle(const EpisodeParams& p) const {
  sim::BottleAssembly b;
  b.base_geom = p.base_geom;
  b.lid_geom = p.lid_geom;
  // Mass split by volume.
  const double vb = p.base_geom.radius * p.base_geom.radius * p.base_geom.height;
  const double vl = p.lid_geom.radius * p.lid_geom.radius * p.lid_geom.height;
  b.base_mass = p.mass * vb / (vb + vl);
  b.lid_mass = p.mass * vl / (vb + vl);
  b.brake = p.brake;
  sim::place_ring_keypoints(b, config_.keypoints_per_link);
  sim::validate(b);
  return b;
}

EnvState LidTwistEnv::reset_episode(Rng rng) const {
  const auto& dr = config_.dr;
  const double floor_z = palm_height() - config_.z_min_below_palm;
  for (int attempt = 0; attempt < config_.max_reset_attempts; ++attempt) {
    EnvState s;
    s.params = sample_params(rng);
    s.bottle = make_bottle(s.params);

    // Default pose: axis along +y through the joint point, resting on the
    // palms, plus jitter.
    Vector3d joint = config_.default_joint_point;
    joint.z() = palm_height() + s.params.base_geom.radius + config_.drop_height;
    for (int i = 0; i < 3; ++i) joint[i] += rng.uniform(-dr.object_init_position, dr.object_init_position);
    const double yaw = rng.uniform(-dr.object_init_z_orientation, dr.object_init_z_orientation);
    const Quaterniond lay(Eigen::AngleAxisd(-0.5 * kPi, Vector3d::UnitX()));
    s.bottle.root.orientation = Quaterniond(Eigen::AngleAxisd(yaw, Vector3d::UnitZ())) * lay;
    s.bottle.root.position = joint - sim::joint_plane_offset(s.bottle) * sim::joint_axis_world(s.bottle);

    JointVector q = hand_.canonical;
    for (int i = 0; i < kNumJoints; ++i) q[i] += dr.joint_init_noise * rng.normal();
    q = q.cwiseMax(hand_.lower).cwiseMin(hand_.upper);
    s.hand = hand::make_hand_state(hand_, q);
    s.gains.kp = JointVector::Constant(config_.kp * s.params.kp_scale);
    s.gains.kd = JointVector::Constant(config_.kd * s.params.kd_scale);

    s.rng = rng;
    const int settle = static_cast<int>(std::lround(config_.settle_time / physics_dt()));
    try {
      simulate(s, settle, false);
    } catch (const std::runtime_error&) {
      rng = s.rng;
      continue;
    }
    rng = s.rng;
    if (s.bottle.root.position.z() < floor_z) continue;

    s.start_angle = s.bottle.lid_angle;
    s.aligned_once = alignment_angle(s) <= config_.align_angle;
    return s;
  }
  throw std::runtime_error("reset_episode: bottle placement failed after " +
                           std::to_string(config_.max_reset_attempts) + " attempts");
}

double LidTwistEnv::alignment_angle(const EnvState& s) const {
  return -reward_pose(sim::joint_axis_world(s.bottle), config_.target_direction);
}

void LidTwistEnv::simulate(EnvState& s, int substeps, bool with_random_force) const {
  const double dt = physics_dt();
  const double mu_tip = 0.5 * (s.params.friction + s.params.hand_friction);
  sim::AssemblyForces forces;
  forces.contact = config_.contact;
  forces.contact.friction_coeff = mu_tip;
  forces.external_force = with_random_force ? s.random_force : Vector3d::Zero();

  std::array<sim::Fingertip, kNumFingers> tips;
  sim::ContactList contacts;
  for (int k = 0; k < substeps; ++k) {
    const auto before = s.hand.tips;
    s.hand = hand::step_pd_targets(hand_, s.hand, s.gains, dt);
    for (int f = 0; f < kNumFingers; ++f) {
      tips[f].position = s.hand.tips[f];
      tips[f].velocity = (s.hand.tips[f] - before[f]) / dt;
      tips[f].radius = hand_.chains[f].tip_radius;
    }
    sim::detect_contacts(s.bottle, tips, hand_.palms, contacts);
    s.bottle = sim::step_assembly(s.bottle, contacts.view(), forces, dt);
  }
}

bool LidTwistEnv::apply_random_force(EnvState& s) const {
  const auto& rf = config_.dr.random_force;
  const int period = std::max(1, static_cast<int>(std::lround(rf.interval / config_.control_dt)));
  if (++s.force_clock < period) return false;
  s.force_clock = 0;
  if (s.rng.bernoulli(rf.probability)) {
    s.random_force = rf.scale * s.params.mass * s.rng.unit_vector();
    return true;
  }
  s.random_force *= rf.decay;
  return false;
}

void LidTwistEnv::build_observation(EnvState& s, PolicyObservation& obs, PrivilegedObservation& priv) const {
  const auto& dr = config_.dr;
  const Vector3d base_c = sim::base_center_world(s.bottle);
  const Vector3d lid_c = sim::lid_center_world(s.bottle);

  priv.values.resize(privileged_obs_dim(config_.keypoints_per_link));
  auto& p = priv.values;
  p.segment<kNumJoints>(kObsQ) = s.hand.q;
  p.segment<3>(kObsBase) = base_c;
  p.segment<3>(kObsLid) = lid_c;
  p.segment<kNumJoints>(kObsTarget) = s.hand.target;
  int o = kPolicyObsDim;
  p.segment<kNumJoints>(o) = s.hand.qd;
  o += kNumJoints;
  for (int f = 0; f < kNumFingers; ++f, o += 3) p.segment<3>(o) = s.hand.tips[f];
  std::vector<Vector3d> kb, kl;
  sim::keypoints_world(s.bottle, kb, kl);
  for (const auto& k : kb) p.segment<3>(o) = k, o += 3;
  for (const auto& k : kl) p.segment<3>(o) = k, o += 3;
  const Quaterniond& q = s.bottle.root.orientation;
  p.segment<4>(o) << q.w(), q.x(), q.y(), q.z();
  o += 4;
  p.segment<3>(o) = s.bottle.root.linear_velocity;
  o += 3;
  p.segment<3>(o) = s.bottle.root.angular_velocity;
  o += 3;
  p.segment<3>(o) = s.random_force;
  o += 3;
  p[o++] = s.bottle.joint_torque;
  const double mass_mid = 0.5 * (dr.object_mass.lo + dr.object_mass.hi);
  p[o++] = s.params.mass / mass_mid;
  p[o++] = s.params.friction;
  p[o++] = s.params.shape_scale;

  Eigen::VectorXd fresh = p.head<kPolicyObsDim>();
  for (int i = 0; i < kNumJoints; ++i) fresh[kObsQ + i] += dr.joint_obs_noise * s.rng.normal();
  for (int i = 0; i < 6; ++i) fresh[kObsBase + i] += dr.keypoint_obs_noise * s.rng.normal();
  if (!config_.vision) fresh.segment<6>(kObsBase).setZero();
  const bool lag = s.rng.bernoulli(dr.frame_lag_prob);
  if (lag && s.has_last_obs) {
    obs.values = s.last_policy_obs;
  } else {
    obs.values = std::move(fresh);
    s.last_policy_obs = obs.values;
    s.has_last_obs = true;
  }
}

DoneReason LidTwistEnv::check_termination(const EnvState& s) const {
  if (s.bottle.root.position.z() < palm_height() - config_.z_min_below_palm) return DoneReason::kLowZ;
  const int align_step = static_cast<int>(std::lround(config_.align_time / config_.control_dt));
  if (s.step == align_step && !s.aligned_once && alignment_angle(s) > config_.align_angle)
    return DoneReason::kAlignFail;
  if (s.step >= config_.horizon) return DoneReason::kTimeout;
  return DoneReason::kNone;
}

void LidTwistEnv::step(EnvState& s, const JointVector& action, Transition& out) const {
  if (!action.allFinite()) throw std::invalid_argument("env_step: non-finite action");
  const auto& dr = config_.dr;

  JointVector commanded = action;
  for (int i = 0; i < kNumJoints; ++i) commanded[i] += dr.action_noise * s.rng.normal();
  const bool lag = s.rng.bernoulli(dr.action_lag_prob);
  const JointVector executed = (lag && s.has_prev_action) ? s.prev_action : commanded;
  s.prev_action = commanded;
  s.has_prev_action = true;

  hand::apply_action(hand_, s.hand, s.ema, executed, config_.action);
  apply_random_force(s);

  const double angle_before = s.bottle.lid_angle;
  simulate(s, config_.substeps, true);
  s.step += 1;

  RewardTerms terms;
  terms.twist = reward_twist(angle_before, s.bottle.lid_angle);
  if (config_.contact_reward == ContactReward::kKeypoint) {
    std::vector<Vector3d> kb, kl;
    sim::keypoints_world(s.bottle, kb, kl);
    terms.contact = reward_contact(kb, kl, std::span(s.hand.tips).first<kFingersPerHand>(),
                                   std::span(s.hand.tips).last<kFingersPerHand>(),
                                   config_.rewards.contact_sharpness);
  } else {
    terms.contact = reward_gait(s.hand.tips, canonical_tip_heights_, s.step * config_.control_dt,
                                config_.rewards.contact_sharpness);
  }
  const double align = alignment_angle(s);
  terms.pose = -align;
  const JointVector clipped = action.cwiseMax(-1.0).cwiseMin(1.0);
  const Regularizers reg = reward_regularizers(hand::pd_torque(s.hand, s.gains), s.hand.qd, clipped);
  terms.work = reg.work;
  terms.action = reg.action;
  if (align <= config_.align_angle) s.aligned_once = true;

  out.action = clipped;
  out.reward_terms = terms;
  out.reward_total = total_reward(terms, config_.rewards);
  out.done_reason = check_termination(s);
  out.done = out.done_reason != DoneReason::kNone;
  out.lid_angle = s.bottle.lid_angle;
  out.alignment = align;
  out.step = s.step;
  out.error.clear();
  build_observation(s, out.obs, out.priv_obs);
}

std::pair<EnvState, Transition> LidTwistEnv::env_step(const EnvState& state, const JointVector& action) const {
  std::pair<EnvState, Transition> result{state, Transition{}};
  step(result.first, action, result.second);
  return result;
}

}  // namespace twist::env
