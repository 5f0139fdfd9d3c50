#pragma once

#include <concepts>
#include <type_traits>

namespace twist::sim {

// Joint-space stiction on the lid's revolute joint. The lid stays locked
// until the axial torque exceeds the breakaway torque; while slipping, a
// constant kinetic torque plus a viscous term opposes the motion.
struct BrakeModel {
  double breakaway_torque = 0.05;  // N*m
  double kinetic_torque = 0.04;    // N*m, 0 < kinetic <= breakaway
  double viscous_coeff = 1e-4;     // N*m*s/rad
};

void validate(const BrakeModel& brake);

struct BrakeStep {
  double angle = 0.0;
  double velocity = 0.0;
  // Torque the joint transmits to the base link during the step: equal to
  // the applied torque while locked, the friction torque while slipping.
  double joint_torque = 0.0;
};

// Advances the joint by one substep. The friction never drives the
// velocity through zero within a substep: a sign change while slipping
// lands exactly on zero and the next call re-enters the stiction test.
BrakeStep step_brake_joint(double angle, double velocity, double applied_torque,
                           const BrakeModel& brake, double inertia, double dt);

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, BrakeModel>
void visit(Ar& ar, S& s) {
  ar.io(s.breakaway_torque);
  ar.io(s.kinetic_torque);
  ar.io(s.viscous_coeff);
}

}  // namespace twist::sim
