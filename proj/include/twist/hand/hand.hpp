#pragma once

#include <array>
#include <concepts>
#include <type_traits>

#include "twist/hand/kinematics.hpp"
#include "twist/simcore/bottle.hpp"

namespace twist::hand {

// Placement of one finger: the direction it points (yaw about world z) and
// where its tip sits at the canonical pose, relative to the hand base.
struct FingerPlacement {
  double pointing_yaw = 0.0;
  Vector3d canonical_tip = Vector3d::Zero();
};

struct HandDescription {
  FingerChain finger;  // index/middle/ring
  FingerChain thumb;
  // Canonical joint angles of one hand, finger order index, middle, ring, thumb.
  std::array<FingerAngles, kFingersPerHand> canonical;
  // Left hand negates the abduction joint (limits and canonical angle).
  bool mirror_left = true;
  std::array<Vector3d, kNumHands> hand_base;  // world translation of each hand base
  std::array<std::array<FingerPlacement, kFingersPerHand>, kNumHands> placement;
  std::array<sim::SupportPatch, kNumHands> palm;  // relative to the hand base
};

HandDescription default_hand_description();

// Fixed kinematic model of both hands. Joint order: left hand (fingers
// 0..3), then right hand (fingers 4..7); 4 joints per finger.
struct HandModel {
  std::array<FingerChain, kNumFingers> chains;
  std::array<Eigen::Isometry3d, kNumFingers> mounts;  // world transform of each finger base
  std::array<Eigen::Isometry3d, kNumHands> hand_bases;
  JointVector lower = JointVector::Zero();
  JointVector upper = JointVector::Zero();
  JointVector canonical = JointVector::Zero();
  std::array<sim::SupportPatch, kNumHands> palms;

  static HandModel build(const HandDescription& desc);
};

struct HandState {
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  JointVector target = JointVector::Zero();
  std::array<Vector3d, kNumFingers> tips{};
};

struct PdGains {
  JointVector kp = JointVector::Constant(20.0);
  JointVector kd = JointVector::Constant(2.0 * 4.47213595499958);
};

FingerAngles finger_angles(const JointVector& q, int finger);
Vector3d fingertip_position(const HandModel& model, const JointVector& q, int finger);
void update_fingertips(const HandModel& model, HandState& state);

// Hand at `q` with zero velocity, targets equal to q and fingertips filled in.
HandState make_hand_state(const HandModel& model, const JointVector& q);

// Unit-inertia PD dynamics qdd = kp (target - q) - kd qd, one semi-implicit
// step, clamped to joint limits (velocity zeroed at a limit).
HandState step_pd_targets(const HandModel& model, const HandState& state, const PdGains& gains, double dt);

// PD command, used as the joint torque proxy.
JointVector pd_torque(const HandState& state, const PdGains& gains);

struct ActionParams {
  double scale = 0.1;  // eta
  double ema = 0.75;   // beta
};

// Clips `action` to [-1, 1], smooths it into `ema` (ema' = beta ema + (1-beta) a)
// and moves the joint targets by scale * ema', clamped to joint limits.
void apply_action(const HandModel& model, HandState& state, JointVector& ema,
                  const JointVector& action, const ActionParams& params);

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, HandState>
void visit(Ar& ar, S& s) {
  ar.io(s.q);
  ar.io(s.qd);
  ar.io(s.target);
  ar.io(s.tips);
}

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, PdGains>
void visit(Ar& ar, S& s) {
  ar.io(s.kp);
  ar.io(s.kd);
}

}  // namespace twist::hand
