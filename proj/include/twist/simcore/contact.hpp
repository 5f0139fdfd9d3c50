#pragma once

#include <optional>

#include "twist/core/types.hpp"

namespace twist::sim {

enum class Link : int { kBase = 0, kLid = 1 };

// Solid cylinder in world coordinates.
struct Cylinder {
  Vector3d center = Vector3d::Zero();
  Vector3d axis = Vector3d::UnitZ();  // unit
  double radius = 0.0;
  double half_height = 0.0;
};

struct ContactPoint {
  Vector3d position = Vector3d::Zero();  // on the bottle surface
  Vector3d normal = Vector3d::UnitZ();   // from the bottle surface toward the fingertip
  double penetration_depth = 0.0;
  Link link = Link::kBase;
  int fingertip_id = 0;
};

// Sphere against a solid cylinder (lateral surface and both caps). Returns
// the contact against the nearest surface feature when the sphere
// penetrates, nothing otherwise. Throws std::invalid_argument for a
// degenerate cylinder or a non-positive sphere radius.
std::optional<ContactPoint> collide_sphere_cylinder(const Vector3d& center, double sphere_radius,
                                                    const Cylinder& cylinder, Link link,
                                                    int fingertip_id = 0);

struct ContactParams {
  double stiffness = 1000.0;       // N/m
  double damping = 10.0;           // N*s/m
  double friction_coeff = 1.0;
  double slip_velocity_scale = 1e-3;  // m/s, tanh regularization scale
};

// Penalty force on the bottle at a contact, together with the damping
// coefficients of its linearization in the relative velocity, which the
// assembly integrator uses to treat velocity-dependent forces implicitly:
//   force = -elastic * normal + (normal_damping * n n^T + tangential_damping * (I - n n^T)) * v_rel
struct ContactForce {
  Vector3d force = Vector3d::Zero();
  double elastic = 0.0;
  double normal_damping = 0.0;
  double tangential_damping = 0.0;
  bool active = false;
};

// `relative_velocity` is the fingertip velocity minus the velocity of the
// bottle material point at the contact. Normal force is
// max(0, k*depth - c*v_n) pushing the bottle away from the fingertip; the
// tangential force drags the bottle along the fingertip slip with magnitude
// mu*|F_n|*tanh(|v_t|/v_s).
ContactForce contact_force(const ContactPoint& cp, const Vector3d& relative_velocity,
                           const ContactParams& params);

}  // namespace twist::sim
