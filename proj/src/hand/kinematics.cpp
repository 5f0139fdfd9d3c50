#include "twist/hand/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::hand {

void validate(const FingerChain& chain) {
  for (const auto& j : chain.joints) {
    if (!(j.link_length > 0.0)) throw std::invalid_argument("finger chain: link lengths must be > 0");
    if (!(j.lower < j.upper)) throw std::invalid_argument("finger chain: joint limits need lower < upper");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw std::invalid_argument("finger chain: joint axis must be unit");
  }
  if (!(chain.tip_radius > 0.0)) throw std::invalid_argument("finger chain: tip radius must be > 0");
}

namespace {

// Rodrigues' formula for a unit axis.
Matrix3d axis_rotation(const Vector3d& k, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Matrix3d r;
  r << t * k.x() * k.x() + c, t * k.x() * k.y() - s * k.z(), t * k.x() * k.z() + s * k.y(),
      t * k.x() * k.y() + s * k.z(), t * k.y() * k.y() + c, t * k.y() * k.z() - s * k.x(),
      t * k.x() * k.z() - s * k.y(), t * k.y() * k.z() + s * k.x(), t * k.z() * k.z() + c;
  return r;
}

}  // namespace

Vector3d forward_kinematics(const FingerChain& chain, const FingerAngles& angles,
                            const Eigen::Isometry3d& base) {
  Matrix3d rot = base.linear();
  Vector3d pos = base.translation();
  for (int j = 0; j < kJointsPerFinger; ++j) {
    const JointSpec& js = chain.joints[j];
    rot = rot * axis_rotation(js.axis, angles[j]);
    pos += js.link_length * rot.col(0);
  }
  return pos;
}

double distal_length(const FingerChain& chain, int j) {
  double total = 0.0;
  for (int k = j; k < kJointsPerFinger; ++k) total += chain.joints[k].link_length;
  return total;
}

}  // namespace twist::hand
