#include "twist/simcore/bottle.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace twist::sim {

namespace {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

double composite_com(const BottleAssembly& b) {
  // Along the axis, measured from the joint plane.
  const double m = b.base_mass + b.lid_mass;
  return (b.base_mass * (-0.5 * b.base_geom.height) + b.lid_mass * (0.5 * b.lid_geom.height)) / m;
}

}  // namespace

double joint_plane_offset(const BottleAssembly& b) { return -composite_com(b); }
double base_center_offset(const BottleAssembly& b) {
  return -0.5 * b.base_geom.height - composite_com(b);
}
double lid_center_offset(const BottleAssembly& b) {
  return 0.5 * b.lid_geom.height - composite_com(b);
}

MassProperties assembly_mass_properties(const BottleAssembly& b) {
  auto cylinder_inertia = [](double m, const CylinderGeom& g, double offset) {
    const double r2 = g.radius * g.radius;
    const double transverse = m * (3.0 * r2 + g.height * g.height) / 12.0 + m * offset * offset;
    return Vector3d(transverse, transverse, 0.5 * m * r2);
  };
  MassProperties props;
  props.mass = b.base_mass + b.lid_mass;
  props.inertia = cylinder_inertia(b.base_mass, b.base_geom, base_center_offset(b)) +
                  cylinder_inertia(b.lid_mass, b.lid_geom, lid_center_offset(b));
  return props;
}

double lid_axial_inertia(const BottleAssembly& b) {
  return 0.5 * b.lid_mass * b.lid_geom.radius * b.lid_geom.radius;
}

Vector3d joint_axis_world(const BottleAssembly& b) { return b.root.orientation * joint_axis_local(); }

Vector3d base_center_world(const BottleAssembly& b) {
  return b.root.position + base_center_offset(b) * joint_axis_world(b);
}

Vector3d lid_center_world(const BottleAssembly& b) {
  return b.root.position + lid_center_offset(b) * joint_axis_world(b);
}

Cylinder base_cylinder(const BottleAssembly& b) {
  return {base_center_world(b), joint_axis_world(b), b.base_geom.radius, 0.5 * b.base_geom.height};
}

Cylinder lid_cylinder(const BottleAssembly& b) {
  return {lid_center_world(b), joint_axis_world(b), b.lid_geom.radius, 0.5 * b.lid_geom.height};
}

Quaterniond lid_orientation(const BottleAssembly& b) {
  return b.root.orientation * Quaterniond(Eigen::AngleAxisd(b.lid_angle, joint_axis_local()));
}

void keypoints_world(const BottleAssembly& b, std::vector<Vector3d>& base_out,
                     std::vector<Vector3d>& lid_out) {
  const Matrix3d rb = b.root.orientation.toRotationMatrix();
  const Matrix3d rl = lid_orientation(b).toRotationMatrix();
  base_out.resize(b.keypoints_base.size());
  lid_out.resize(b.keypoints_lid.size());
  for (std::size_t i = 0; i < b.keypoints_base.size(); ++i)
    base_out[i] = b.root.position + rb * b.keypoints_base[i];
  for (std::size_t i = 0; i < b.keypoints_lid.size(); ++i)
    lid_out[i] = b.root.position + rl * b.keypoints_lid[i];
}

void place_ring_keypoints(BottleAssembly& b, int count) {
  if (count < 1) throw std::invalid_argument("place_ring_keypoints: count must be >= 1");
  b.keypoints_base.clear();
  b.keypoints_lid.clear();
  const double zb = base_center_offset(b);
  const double zl = lid_center_offset(b);
  for (int i = 0; i < count; ++i) {
    const double phi = 2.0 * kPi * i / count;
    const double c = std::cos(phi), s = std::sin(phi);
    b.keypoints_base.emplace_back(b.base_geom.radius * c, b.base_geom.radius * s, zb);
    b.keypoints_lid.emplace_back(b.lid_geom.radius * c, b.lid_geom.radius * s, zl);
  }
}

void validate(const BottleAssembly& b) {
  if (!(b.base_geom.radius > 0.0) || !(b.base_geom.height > 0.0) || !(b.lid_geom.radius > 0.0) ||
      !(b.lid_geom.height > 0.0))
    throw std::invalid_argument("bottle: cylinder dimensions must be positive");
  if (!(b.base_mass > 0.0) || !(b.lid_mass > 0.0))
    throw std::invalid_argument("bottle: link masses must be positive");
  if (b.keypoints_base.empty() || b.keypoints_lid.empty())
    throw std::invalid_argument("bottle: keypoint sets must be non-empty");
  validate(b.brake);
}

void detect_contacts(const BottleAssembly& b, std::span<const Fingertip> tips,
                     std::span<const SupportPatch> patches, ContactList& out) {
  out.size = 0;
  const Cylinder cyl[2] = {base_cylinder(b), lid_cylinder(b)};
  const Link links[2] = {Link::kBase, Link::kLid};
  for (std::size_t t = 0; t < tips.size(); ++t) {
    for (int k = 0; k < 2; ++k) {
      // Cheap bounding-sphere reject.
      const double reach = std::hypot(cyl[k].radius, cyl[k].half_height) + tips[t].radius;
      if ((tips[t].position - cyl[k].center).squaredNorm() > reach * reach) continue;
      if (auto cp = collide_sphere_cylinder(tips[t].position, tips[t].radius, cyl[k], links[k],
                                            static_cast<int>(t))) {
        out.push({*cp, tips[t].velocity});
      }
    }
  }
  if (patches.empty()) return;
  // Lowest rim point of every cap against the palm patches.
  for (int k = 0; k < 2; ++k) {
    const Vector3d& a = cyl[k].axis;
    Vector3d down = -Vector3d::UnitZ() + a.z() * a;  // -z projected off the axis
    const double dn = down.norm();
    down = dn > 1e-9 ? Vector3d(down / dn) : Vector3d::Zero();
    for (double s : {-1.0, 1.0}) {
      const Vector3d p = cyl[k].center + s * cyl[k].half_height * a + cyl[k].radius * down;
      for (const auto& patch : patches) {
        const double depth = patch.height - p.z();
        if (depth <= 0.0 || depth > patch.thickness) continue;
        if (p.x() < patch.x_min || p.x() > patch.x_max || p.y() < patch.y_min || p.y() > patch.y_max)
          continue;
        ContactPoint cp;
        cp.position = p;
        cp.normal = -Vector3d::UnitZ();
        cp.penetration_depth = depth;
        cp.link = links[k];
        cp.fingertip_id = -1;
        out.push({cp, Vector3d::Zero()});
      }
    }
  }
}

BottleAssembly step_assembly(const BottleAssembly& bottle, std::span<const ExternalContact> contacts,
                             const AssemblyForces& forces, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_assembly: dt must be positive");
  if (!forces.gravity.allFinite() || !forces.external_force.allFinite())
    throw std::invalid_argument("step_assembly: non-finite external force");

  const MassProperties props = assembly_mass_properties(bottle);
  const RigidBodyState& root = bottle.root;
  const Vector3d axis = joint_axis_world(bottle);
  const Vector3d& x = root.position;
  const Vector3d& v = root.linear_velocity;
  const Vector3d& w = root.angular_velocity;

  // Lid joint: axial torque from lid contacts at the current velocities and
  // the matching axial damping, which enters the joint as extra inertia.
  // The penetration depth follows the end-of-step normal velocity, so the
  // elastic force contributes stiffness * dt of extra normal damping.
  const double stiff_dt = forces.contact.stiffness * dt;
  double lid_torque = 0.0;
  double axial_damping = 0.0;
  for (const auto& c : contacts) {
    if (c.point.link != Link::kLid) continue;
    const Vector3d r = c.point.position - x;
    const Vector3d spin = axis.cross(r);
    const Vector3d vp = v + w.cross(r) + bottle.lid_velocity * spin;
    const ContactForce f = contact_force(c.point, c.driver_velocity - vp, forces.contact);
    if (!f.active) continue;
    lid_torque += axis.dot(r.cross(f.force));
    const Vector3d& n = c.point.normal;
    const double sn = spin.dot(n);
    axial_damping += (f.normal_damping + stiff_dt) * sn * sn + f.tangential_damping * (spin.squaredNorm() - sn * sn);
  }
  const double lid_inertia = lid_axial_inertia(bottle);
  const BrakeStep joint = step_brake_joint(bottle.lid_angle, bottle.lid_velocity, lid_torque,
                                           bottle.brake, lid_inertia + dt * axial_damping, dt);
  const bool locked = bottle.lid_velocity == 0.0 && joint.velocity == 0.0;

  // Root: (M + dt * sum G D J) u' = M u + dt * (sum G b + external + gyro).
  const Matrix3d inertia_w = world_inertia(props, root.orientation);
  Matrix6d lhs = Matrix6d::Zero();
  lhs.topLeftCorner<3, 3>() = props.mass * Matrix3d::Identity();
  lhs.bottomRightCorner<3, 3>() = inertia_w;
  Vector6d u;
  u << v, w;
  const Vector6d momentum = lhs * u;

  Vector6d explicit_q = Vector6d::Zero();
  Matrix6d damping_q = Matrix6d::Zero();
  for (const auto& c : contacts) {
    const Vector3d r = c.point.position - x;
    const bool on_lid = c.point.link == Link::kLid;
    const Vector3d spin_v = on_lid ? Vector3d(joint.velocity * axis.cross(r)) : Vector3d::Zero();
    const Vector3d vp = v + w.cross(r) + spin_v;
    const ContactForce f = contact_force(c.point, c.driver_velocity - vp, forces.contact);
    if (!f.active) continue;
    const Vector3d& n = c.point.normal;
    const Matrix3d nn = n * n.transpose();
    const Matrix3d d = (f.normal_damping + stiff_dt) * nn + f.tangential_damping * (Matrix3d::Identity() - nn);
    const Vector3d b = -f.elastic * n + d * (c.driver_velocity - spin_v);
    const Matrix3d rx = skew(r);
    // J = [I, -[r]x]; the implicit part J^T D J keeps the system symmetric
    // positive definite.
    Eigen::Matrix<double, 3, 6> dj;
    dj.leftCols<3>() = d;
    dj.rightCols<3>() = -d * rx;
    damping_q.topRows<3>() += dj;
    damping_q.bottomRows<3>() += rx * dj;
    explicit_q.head<3>() += b;
    explicit_q.tail<3>() += rx * b;
  }
  // A slipping lid keeps its axial contact torque and hands the root the
  // brake torque instead.
  if (!locked) explicit_q.tail<3>() += (joint.joint_torque - lid_torque) * axis;
  explicit_q.head<3>() += props.mass * forces.gravity + forces.external_force;

  const Vector3d gyro = gyroscopic_torque(props, root);
  Vector6d rhs = momentum + dt * explicit_q;
  rhs.tail<3>() += dt * gyro;
  lhs += dt * damping_q;
  Vector6d u_next;
  if (damping_q.isZero(0.0)) {
    u_next.head<3>() = rhs.head<3>() / props.mass;
    u_next.tail<3>() = inertia_w.inverse() * rhs.tail<3>();
  } else {
    u_next = lhs.partialPivLu().solve(rhs);
  }

  // Forces evaluated at the end-of-step velocity.
  const Vector6d q = explicit_q - damping_q * u_next;
  Wrench wrench{q.head<3>(), q.tail<3>()};

  BottleAssembly next = bottle;
  next.root = integrate_free_body(root, props, wrench, dt);
  next.lid_angle = joint.angle;
  next.lid_velocity = joint.velocity;
  next.joint_torque = joint.joint_torque;
  if (!next.root.position.allFinite() || !next.root.linear_velocity.allFinite() ||
      !next.root.angular_velocity.allFinite() || !std::isfinite(next.lid_angle))
    throw std::runtime_error("step_assembly: non-finite state");
  return next;
}

}  // namespace twist::sim
