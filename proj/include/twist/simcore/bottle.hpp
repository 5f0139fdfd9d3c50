#pragma once

#include <array>
#include <concepts>
#include <span>
#include <type_traits>
#include <vector>

#include "twist/simcore/brake.hpp"
#include "twist/simcore/contact.hpp"
#include "twist/simcore/rigid_body.hpp"

namespace twist::sim {

struct CylinderGeom {
  double radius = 0.0;
  double height = 0.0;
};

// Two coaxial cylinders joined by a continuous revolute joint. The root frame
// sits at the composite centre of mass with its z axis on the joint axis,
// pointing from the base toward the lid; the lid frame is the root frame
// rotated by lid_angle about that axis. Keypoints are stored in their own
// link frame.
struct BottleAssembly {
  RigidBodyState root;
  double lid_angle = 0.0;
  double lid_velocity = 0.0;
  CylinderGeom base_geom;
  CylinderGeom lid_geom;
  double base_mass = 0.0;
  double lid_mass = 0.0;
  BrakeModel brake;
  std::vector<Vector3d> keypoints_base;
  std::vector<Vector3d> keypoints_lid;
  double joint_torque = 0.0;  // torque transmitted by the brake in the last substep
};

inline Vector3d joint_axis_local() { return Vector3d::UnitZ(); }

// Offsets along the local axis, relative to the composite centre of mass.
double joint_plane_offset(const BottleAssembly& b);
double base_center_offset(const BottleAssembly& b);
double lid_center_offset(const BottleAssembly& b);

MassProperties assembly_mass_properties(const BottleAssembly& b);
double lid_axial_inertia(const BottleAssembly& b);

Vector3d joint_axis_world(const BottleAssembly& b);
Cylinder base_cylinder(const BottleAssembly& b);
Cylinder lid_cylinder(const BottleAssembly& b);
Vector3d base_center_world(const BottleAssembly& b);
Vector3d lid_center_world(const BottleAssembly& b);
Quaterniond lid_orientation(const BottleAssembly& b);

void keypoints_world(const BottleAssembly& b, std::vector<Vector3d>& base_out,
                     std::vector<Vector3d>& lid_out);

// `count` points evenly spaced on the lateral surface at mid-height of each
// link, expressed in the link frame.
void place_ring_keypoints(BottleAssembly& b, int count);

// Validates geometry, masses and brake; throws std::invalid_argument.
void validate(const BottleAssembly& b);

// Fingertip sphere driven kinematically.
struct Fingertip {
  Vector3d position = Vector3d::Zero();
  Vector3d velocity = Vector3d::Zero();
  double radius = 0.012;
};

// Static upward-facing rectangular slab (palm support). Points deeper than
// `thickness` below the top have passed under it and are ignored.
struct SupportPatch {
  double height = 0.0;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double thickness = 0.02;
};

// A contact together with the velocity of the body touching the bottle.
struct ExternalContact {
  ContactPoint point;
  Vector3d driver_velocity = Vector3d::Zero();
};

inline constexpr int kMaxContacts = 48;

struct ContactList {
  std::array<ExternalContact, kMaxContacts> items;
  int size = 0;

  void push(const ExternalContact& c) {
    if (size < kMaxContacts) items[size++] = c;
  }
  std::span<const ExternalContact> view() const { return {items.data(), static_cast<std::size_t>(size)}; }
};

void detect_contacts(const BottleAssembly& b, std::span<const Fingertip> tips,
                     std::span<const SupportPatch> patches, ContactList& out);

struct AssemblyForces {
  Vector3d gravity = Vector3d(0.0, 0.0, -9.81);
  Vector3d external_force = Vector3d::Zero();  // applied at the centre of mass
  ContactParams contact;
};

// Advances the assembly by one physics substep. Contact damping, friction and
// the change of penetration over the step are evaluated at the end-of-step
// velocity (linearly implicit); the
// lid's axial contact torque drives the brake joint, and the joint passes
// its transmitted torque back to the root.
BottleAssembly step_assembly(const BottleAssembly& bottle, std::span<const ExternalContact> contacts,
                             const AssemblyForces& forces, double dt);

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, CylinderGeom>
void visit(Ar& ar, S& s) {
  ar.io(s.radius);
  ar.io(s.height);
}

template <class Ar, class S>
  requires std::same_as<std::remove_const_t<S>, BottleAssembly>
void visit(Ar& ar, S& s) {
  ar.io(s.root);
  ar.io(s.lid_angle);
  ar.io(s.lid_velocity);
  ar.io(s.base_geom);
  ar.io(s.lid_geom);
  ar.io(s.base_mass);
  ar.io(s.lid_mass);
  ar.io(s.brake);
  ar.io(s.keypoints_base);
  ar.io(s.keypoints_lid);
  ar.io(s.joint_torque);
}

}  // namespace twist::sim
