#include "twist/env/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace twist::env {

double reward_twist(double angle_before, double angle_after) { return angle_after - angle_before; }

double nearest_distance(std::span<const Vector3d> set, const Vector3d& x) {
  if (set.empty()) throw std::invalid_argument("nearest_distance: empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set) best = std::min(best, (p - x).squaredNorm());
  return std::sqrt(best);
}

double reward_contact(std::span<const Vector3d> base_keypoints, std::span<const Vector3d> lid_keypoints,
                      std::span<const Vector3d> left_tips, std::span<const Vector3d> right_tips,
                      double sharpness) {
  if (base_keypoints.empty() || lid_keypoints.empty())
    throw std::invalid_argument("reward_contact: keypoint sets must be non-empty");
  double r = 0.0;
  for (const auto& f : left_tips) r += 1.0 / (1.0 + sharpness * nearest_distance(base_keypoints, f));
  for (const auto& f : right_tips) r += 1.0 / (1.0 + sharpness * nearest_distance(lid_keypoints, f));
  return r;
}

double reward_pose(const Vector3d& axis, const Vector3d& direction) {
  const double na = axis.norm(), nd = direction.norm();
  if (!(na > 0.0) || !(nd > 0.0)) throw std::invalid_argument("reward_pose: zero-length vector");
  // Same angle as arccos of the clamped cosine, but well conditioned near 0 and pi.
  const Vector3d a = axis / na, d = direction / nd;
  return -std::atan2(a.cross(d).norm(), a.dot(d));
}

Regularizers reward_regularizers(const JointVector& torque, const JointVector& qd, const JointVector& action) {
  return {torque.cwiseProduct(qd).cwiseAbs().sum(), action.squaredNorm()};
}

double total_reward(const RewardTerms& t, const RewardWeights& w) {
  return w.contact * t.contact + w.twist * t.twist + w.pose * t.pose + w.work * t.work + w.action * t.action;
}

double reward_gait(std::span<const Vector3d> tips, std::span<const double> canonical_heights, double time,
                   double sharpness) {
  constexpr double kAmplitude = 0.01;  // m
  constexpr double kPeriod = 1.0;      // s
  double r = 0.0;
  const std::size_t n = tips.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * kPi * (time / kPeriod + static_cast<double>(i % 4) / 4.0);
    const double ref = canonical_heights[i] + kAmplitude * std::sin(phase);
    r += 1.0 / (1.0 + sharpness * std::abs(tips[i].z() - ref));
  }
  return r;
}

}  // namespace twist::env
