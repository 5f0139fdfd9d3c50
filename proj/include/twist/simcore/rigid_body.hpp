#pragma once

#include <concepts>
#include <type_traits>

#include "twist/core/types.hpp"

namespace twist::sim {

// Pose and twist of a free body. Velocities are world-frame; the position
// is the centre of mass.
struct RigidBodyState {
  Vector3d position = Vector3d::Zero();
  Quaterniond orientation = Quaterniond::Identity();
  Vector3d linear_velocity = Vector3d::Zero();
  Vector3d angular_velocity = Vector3d::Zero();
};

// Mass and principal (body-frame, diagonal) inertia about the centre of mass.
struct MassProperties {
  double mass = 1.0;
  Vector3d inertia = Vector3d::Ones();
};

struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d torque = Vector3d::Zero();
};

Matrix3d world_inertia(const MassProperties& props, const Quaterniond& orientation);

// Gyroscopic torque -w x (I w) in world frame.
Vector3d gyroscopic_torque(const MassProperties& props, const RigidBodyState& state);

// One step: velocities first, then pose. Position uses the mean of the old
// and new linear velocity, which is exact for constant force; orientation
// uses the new angular velocity through the exponential map and is
// renormalized. Throws std::invalid_argument for dt <= 0 or a non-finite
// wrench.
RigidBodyState integrate_free_body(const RigidBodyState& state, const MassProperties& props,
                                   const Wrench& wrench, double dt);

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, RigidBodyState>
void visit(Ar& ar, S& s) {
  ar.io(s.position);
  ar.io(s.orientation);
  ar.io(s.linear_velocity);
  ar.io(s.angular_velocity);
}

}  // namespace twist::sim
