#include "twist/simcore/contact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twist::sim {

namespace {

Vector3d any_perpendicular(const Vector3d& axis) {
  const Vector3d trial = std::abs(axis.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
  return (trial - trial.dot(axis) * axis).normalized();
}

}  // namespace

std::optional<ContactPoint> collide_sphere_cylinder(const Vector3d& center, double sphere_radius,
                                                    const Cylinder& cylinder, Link link,
                                                    int fingertip_id) {
  if (!(cylinder.radius > 0.0) || !(cylinder.half_height > 0.0))
    throw std::invalid_argument("collide_sphere_cylinder: degenerate cylinder");
  if (!(sphere_radius > 0.0))
    throw std::invalid_argument("collide_sphere_cylinder: sphere radius must be positive");

  const Vector3d& axis = cylinder.axis;
  const Vector3d d = center - cylinder.center;
  const double h = d.dot(axis);
  const Vector3d radial = d - h * axis;
  const double rho = radial.norm();
  const double abs_h = std::abs(h);
  const double hh = cylinder.half_height;
  const double r = cylinder.radius;

  ContactPoint cp;
  cp.link = link;
  cp.fingertip_id = fingertip_id;

  if (abs_h <= hh && rho <= r) {
    // Centre inside the solid: push out through the nearest face.
    const double to_side = r - rho;
    const double to_cap = hh - abs_h;
    if (to_side <= to_cap) {
      const Vector3d dir = rho > 1e-12 ? Vector3d(radial / rho) : any_perpendicular(axis);
      cp.normal = dir;
      cp.position = cylinder.center + h * axis + r * dir;
      cp.penetration_depth = sphere_radius + to_side;
    } else {
      const double s = h >= 0.0 ? 1.0 : -1.0;
      cp.normal = s * axis;
      cp.position = cylinder.center + s * hh * axis + radial;
      cp.penetration_depth = sphere_radius + to_cap;
    }
    return cp;
  }

  const double hc = std::clamp(h, -hh, hh);
  const Vector3d rc = rho > r ? Vector3d(radial * (r / rho)) : radial;
  const Vector3d closest = cylinder.center + hc * axis + rc;
  const Vector3d gap = center - closest;
  const double dist = gap.norm();
  if (dist >= sphere_radius) return std::nullopt;
  cp.normal = gap / dist;  // dist > 0 since the centre is outside the solid
  cp.position = closest;
  cp.penetration_depth = sphere_radius - dist;
  return cp;
}

ContactForce contact_force(const ContactPoint& cp, const Vector3d& relative_velocity,
                           const ContactParams& params) {
  ContactForce out;
  if (!(cp.penetration_depth > 0.0)) return out;
  const Vector3d& n = cp.normal;
  const double vn = relative_velocity.dot(n);
  const double elastic = params.stiffness * cp.penetration_depth;
  const double fn = elastic - params.damping * vn;
  if (fn <= 0.0) return out;

  const Vector3d vt = relative_velocity - vn * n;
  const double slip = vt.norm();
  const double max_friction = params.friction_coeff * fn;
  // Secant coefficient of mu*fn*tanh(s/vs)/s; finite limit mu*fn/vs at s = 0.
  const double x = slip / params.slip_velocity_scale;
  const double tangential =
      x > 1e-8 ? max_friction * std::tanh(x) / slip : max_friction / params.slip_velocity_scale;

  out.active = true;
  out.elastic = elastic;
  out.normal_damping = params.damping;
  out.tangential_damping = tangential;
  out.force = -fn * n + tangential * vt;
  return out;
}

}  // namespace twist::sim
