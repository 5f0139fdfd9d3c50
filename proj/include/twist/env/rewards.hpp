#pragma once

#include <span>

#include "twist/core/types.hpp"
#include "twist/env/config.hpp"

namespace twist::env {

struct RewardTerms {
  double twist = 0.0;
  double contact = 0.0;
  double pose = 0.0;
  double work = 0.0;
  double action = 0.0;
};

// Lid rotation over one control step.
double reward_twist(double angle_before, double angle_after);

// Distance from `x` to the nearest point of `set`.
double nearest_distance(std::span<const Vector3d> set, const Vector3d& x);

// Sum over fingertips of 1 / (1 + sharpness * d), left-hand tips against the
// base keypoints and right-hand tips against the lid keypoints. Lies in
// (0, left.size() + right.size()]. Throws std::invalid_argument on an empty
// keypoint set.
double reward_contact(std::span<const Vector3d> base_keypoints, std::span<const Vector3d> lid_keypoints,
                      std::span<const Vector3d> left_tips, std::span<const Vector3d> right_tips,
                      double sharpness);

// -arccos(<axis, direction>) after renormalizing both (computed with atan2);
// throws on zero length.
double reward_pose(const Vector3d& axis, const Vector3d& direction);

struct Regularizers {
  double work = 0.0;    // sum |tau_i * qd_i|
  double action = 0.0;  // |a|^2
};

Regularizers reward_regularizers(const JointVector& torque, const JointVector& qd, const JointVector& action);

double total_reward(const RewardTerms& terms, const RewardWeights& w);

// Periodic fingertip-height pattern used by the gait-constraint baseline in
// place of the keypoint term: each fingertip tracks a sinusoidal height
// reference (1 s period, per-finger phase offset) around its canonical
// height. Same range as the keypoint term.
double reward_gait(std::span<const Vector3d> tips, std::span<const double> canonical_heights, double time,
                   double sharpness);

}  // namespace twist::env
