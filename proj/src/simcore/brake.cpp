#include "twist/simcore/brake.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::sim {

void validate(const BrakeModel& brake) {
  if (!(brake.breakaway_torque > 0.0)) throw std::invalid_argument("brake: breakaway_torque must be > 0");
  if (!(brake.kinetic_torque > 0.0) || brake.kinetic_torque > brake.breakaway_torque)
    throw std::invalid_argument("brake: kinetic_torque must lie in (0, breakaway_torque]");
  if (!(brake.viscous_coeff >= 0.0)) throw std::invalid_argument("brake: viscous_coeff must be >= 0");
}

BrakeStep step_brake_joint(double angle, double velocity, double applied_torque,
                           const BrakeModel& brake, double inertia, double dt) {
  if (!std::isfinite(angle) || !std::isfinite(velocity) || !std::isfinite(applied_torque))
    throw std::invalid_argument("step_brake_joint: non-finite input");
  if (!(inertia > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("step_brake_joint: inertia and dt must be positive");

  if (velocity == 0.0 && std::abs(applied_torque) <= brake.breakaway_torque)
    return {angle, 0.0, applied_torque};

  const double direction =
      velocity != 0.0 ? std::copysign(1.0, velocity) : std::copysign(1.0, applied_torque);
  const double friction = direction * brake.kinetic_torque + brake.viscous_coeff * velocity;
  double next_velocity = velocity + (applied_torque - friction) / inertia * dt;
  if (velocity != 0.0 && next_velocity * direction < 0.0) {
    // Crossed zero. Only friction may not cause that; if the applied torque
    // alone would reverse the motion it is allowed to.
    const double driven = velocity + applied_torque / inertia * dt;
    if (driven * direction >= 0.0) next_velocity = 0.0;
  }
  const double joint_torque = applied_torque - inertia * (next_velocity - velocity) / dt;
  return {angle + next_velocity * dt, next_velocity, joint_torque};
}

}  // namespace twist::sim
