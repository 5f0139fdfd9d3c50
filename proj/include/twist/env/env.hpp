#pragma once

#include <concepts>
#include <string>
#include <type_traits>

#include "twist/core/rng.hpp"
#include "twist/env/config.hpp"
#include "twist/env/rewards.hpp"
#include "twist/hand/hand.hpp"
#include "twist/simcore/bottle.hpp"

namespace twist::env {

enum class DoneReason : int { kNone = 0, kTimeout = 1, kLowZ = 2, kAlignFail = 3, kError = 4 };

std::string to_string(DoneReason r);
DoneReason done_reason_from_string(const std::string& s);

// Policy observation layout (70):
//   [0, 32)  joint positions q (noisy)
//   [32, 35) base centre (noisy; zero without vision)
//   [35, 38) lid centre (noisy; zero without vision)
//   [38, 70) joint targets
inline constexpr int kPolicyObsDim = 2 * kNumJoints + 6;
inline constexpr int kObsQ = 0;
inline constexpr int kObsBase = kNumJoints;
inline constexpr int kObsLid = kNumJoints + 3;
inline constexpr int kObsTarget = kNumJoints + 6;

// Privileged layout: the noise-free policy fields (same offsets), then
//   joint velocities (32), fingertip positions (24), base then lid keypoints
//   (3 per point), orientation quaternion w,x,y,z (4), linear velocity (3),
//   angular velocity (3), random force (3), brake torque (1), mass scale,
//   friction scale, shape scale (3).
int privileged_obs_dim(int keypoints_per_link);

// The two inputs are distinct types so the actor can only be fed the policy
// observation.
struct PolicyObservation {
  Eigen::VectorXd values;
};
struct PrivilegedObservation {
  Eigen::VectorXd values;
};

struct EpisodeParams {
  double mass = 0.065;
  double friction = 1.0;
  double hand_friction = 1.0;
  double shape_scale = 1.0;
  double kp_scale = 1.0;
  double kd_scale = 1.0;
  sim::CylinderGeom base_geom;  // after shape scaling
  sim::CylinderGeom lid_geom;
  sim::BrakeModel brake;
};

struct EnvState {
  sim::BottleAssembly bottle;
  hand::HandState hand;
  hand::PdGains gains;
  JointVector ema = JointVector::Zero();
  JointVector prev_action = JointVector::Zero();
  bool has_prev_action = false;
  Vector3d random_force = Vector3d::Zero();
  int force_clock = 0;
  Eigen::VectorXd last_policy_obs;
  bool has_last_obs = false;
  int step = 0;
  double start_angle = 0.0;
  bool aligned_once = false;
  EpisodeParams params;
  Rng rng;
};

struct Transition {
  PolicyObservation obs;
  PrivilegedObservation priv_obs;
  JointVector action = JointVector::Zero();  // commanded, clipped to [-1, 1]
  double reward_total = 0.0;
  RewardTerms reward_terms;
  bool done = false;
  DoneReason done_reason = DoneReason::kNone;
  double lid_angle = 0.0;
  double alignment = 0.0;  // arccos(<axis, target direction>)
  int step = 0;
  std::string error;
};

class LidTwistEnv {
 public:
  explicit LidTwistEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const hand::HandModel& hand_model() const { return hand_; }
  double palm_height() const;
  double physics_dt() const { return config_.control_dt / config_.substeps; }

  EpisodeParams sample_params(Rng& rng) const;
  sim::BottleAssembly make_bottle(const EpisodeParams& params) const;

  // New episode drawn from `rng`; the stream is moved into the state.
  // Throws std::runtime_error when every placement attempt fails.
  EnvState reset_episode(Rng rng) const;

  // Consumes randomness from state.rng and records the emitted policy
  // observation for frame lag.
  void build_observation(EnvState& state, PolicyObservation& obs, PrivilegedObservation& priv) const;

  DoneReason check_termination(const EnvState& state) const;

  // Returns true when a new force was drawn this control step.
  bool apply_random_force(EnvState& state) const;

  // One control step in place.
  void step(EnvState& state, const JointVector& action, Transition& out) const;

  // Value-semantic form of step.
  std::pair<EnvState, Transition> env_step(const EnvState& state, const JointVector& action) const;

  // Physics only: the control period with the current joint targets.
  void simulate(EnvState& state, int substeps, bool with_random_force = true) const;

  double alignment_angle(const EnvState& state) const;

 private:
  EnvConfig config_;
  hand::HandModel hand_;
  std::array<double, kNumFingers> canonical_tip_heights_{};
};

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, EpisodeParams>
void visit(Ar& ar, S& s) {
  ar.io(s.mass);
  ar.io(s.friction);
  ar.io(s.hand_friction);
  ar.io(s.shape_scale);
  ar.io(s.kp_scale);
  ar.io(s.kd_scale);
  ar.io(s.base_geom);
  ar.io(s.lid_geom);
  ar.io(s.brake);
}

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, EnvState>
void visit(Ar& ar, S& s) {
  ar.io(s.bottle);
  ar.io(s.hand);
  ar.io(s.gains);
  ar.io(s.ema);
  ar.io(s.prev_action);
  ar.io(s.has_prev_action);
  ar.io(s.random_force);
  ar.io(s.force_clock);
  ar.io(s.last_policy_obs);
  ar.io(s.has_last_obs);
  ar.io(s.step);
  ar.io(s.start_angle);
  ar.io(s.aligned_once);
  ar.io(s.params);
  ar.io(s.rng);
}

}  // namespace twist::env
