#pragma once

#include <array>

#include "twist/core/types.hpp"

namespace twist::hand {

struct JointSpec {
  Vector3d axis = Vector3d::UnitZ();  // unit, in the frame of the preceding link
  double link_length = 0.0;           // along the local x axis after the joint
  double lower = 0.0;
  double upper = 0.0;
};

struct FingerChain {
  std::array<JointSpec, kJointsPerFinger> joints;
  double tip_radius = 0.012;
};

using FingerAngles = std::array<double, kJointsPerFinger>;

void validate(const FingerChain& chain);

// Each joint rotates about its axis, then the link extends along the
// rotated x axis. Returns the fingertip sphere centre in the frame of `base`.
Vector3d forward_kinematics(const FingerChain& chain, const FingerAngles& angles,
                            const Eigen::Isometry3d& base);

// Sum of link lengths distal to (and including) joint `j`.
double distal_length(const FingerChain& chain, int j);

}  // namespace twist::hand
