#include "twist/simcore/rigid_body.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::sim {

Matrix3d world_inertia(const MassProperties& props, const Quaterniond& orientation) {
  const Matrix3d r = orientation.toRotationMatrix();
  return r * props.inertia.asDiagonal() * r.transpose();
}

Vector3d gyroscopic_torque(const MassProperties& props, const RigidBodyState& state) {
  const Vector3d& w = state.angular_velocity;
  return -w.cross(world_inertia(props, state.orientation) * w);
}

namespace {

Quaterniond exp_rotation(const Vector3d& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    // Second-order series; normalized by the caller.
    return Quaterniond(1.0, 0.5 * rotation_vector.x(), 0.5 * rotation_vector.y(),
                       0.5 * rotation_vector.z());
  }
  const double s = std::sin(0.5 * angle) / angle;
  return Quaterniond(std::cos(0.5 * angle), s * rotation_vector.x(), s * rotation_vector.y(),
                     s * rotation_vector.z());
}

}  // namespace

RigidBodyState integrate_free_body(const RigidBodyState& state, const MassProperties& props,
                                   const Wrench& wrench, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_free_body: dt must be positive");
  if (!wrench.force.allFinite() || !wrench.torque.allFinite())
    throw std::invalid_argument("integrate_free_body: non-finite wrench");
  if (!(props.mass > 0.0) || !(props.inertia.minCoeff() > 0.0))
    throw std::invalid_argument("integrate_free_body: mass and inertia must be positive");

  RigidBodyState next = state;
  next.linear_velocity = state.linear_velocity + wrench.force * (dt / props.mass);

  const Matrix3d r = state.orientation.toRotationMatrix();
  const Matrix3d inertia = r * props.inertia.asDiagonal() * r.transpose();
  const Matrix3d inv_inertia = r * props.inertia.cwiseInverse().asDiagonal() * r.transpose();
  const Vector3d& w = state.angular_velocity;
  next.angular_velocity = w + inv_inertia * (wrench.torque - w.cross(inertia * w)) * dt;

  next.position = state.position + 0.5 * (state.linear_velocity + next.linear_velocity) * dt;
  const Vector3d rotation = next.angular_velocity * dt;
  if (!rotation.isZero(0.0)) {
    next.orientation = exp_rotation(rotation) * state.orientation;
    next.orientation.normalize();
  }
  return next;
}

}  // namespace twist::sim
