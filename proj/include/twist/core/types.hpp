#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace twist {

using Eigen::Matrix3d;
using Eigen::Quaterniond;
using Eigen::Vector3d;

inline constexpr int kNumHands = 2;
inline constexpr int kFingersPerHand = 4;
inline constexpr int kJointsPerFinger = 4;
inline constexpr int kNumFingers = kNumHands * kFingersPerHand;
inline constexpr int kNumJoints = kNumFingers * kJointsPerFinger;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;

inline constexpr double kPi = 3.14159265358979323846;

inline bool all_finite(const Vector3d& v) { return v.allFinite(); }

}  // namespace twist
