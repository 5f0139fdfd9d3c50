#include "twist/hand/hand.hpp"

#include <cmath>
#include <stdexcept>

namespace twist::hand {

namespace {

FingerChain make_chain(const std::array<double, 4>& lengths, const std::array<double, 4>& lower,
                       const std::array<double, 4>& upper, double tip_radius) {
  FingerChain c;
  for (int j = 0; j < kJointsPerFinger; ++j) {
    // Abduction about the palm normal, then three flexion joints that curl
    // the finger upward.
    c.joints[j].axis = j == 0 ? Vector3d::UnitZ() : Vector3d(-Vector3d::UnitY());
    c.joints[j].link_length = lengths[j];
    c.joints[j].lower = lower[j];
    c.joints[j].upper = upper[j];
  }
  c.tip_radius = tip_radius;
  return c;
}

Eigen::Isometry3d yaw_transform(double yaw) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(yaw, Vector3d::UnitZ()).toRotationMatrix();
  return t;
}

}  // namespace

HandDescription default_hand_description() {
  HandDescription d;
  d.finger = make_chain({0.054, 0.038, 0.030, 0.027}, {-0.47, -0.196, -0.174, -0.227},
                        {0.47, 1.61, 1.709, 1.618}, 0.012);
  d.thumb = make_chain({0.040, 0.050, 0.045, 0.040}, {0.263, -0.105, -0.189, -0.162},
                       {1.396, 1.25, 1.644, 1.719}, 0.012);
  d.canonical = {{{-0.0080, 0.9478, 0.6420, -0.0330},
                  {0.0530, 0.7163, 0.9609, 0.0000},
                  {0.0000, 0.7811, 0.7868, 0.3454},
                  {1.0670, 1.1670, 0.7500, 0.4500}}};
  d.mirror_left = true;
  d.hand_base = {Vector3d(0.0, -0.045, 0.0), Vector3d(0.0, 0.045, 0.0)};

  // Default bottle: axis along world y, resting on the palms (centre at
  // z = 0.042), base on the left hand, lid on the right. Fingertips sit 2 mm
  // off the surface, 45 degrees above the horizontal on either side.
  auto side_tip = [](double radius, double y, double side) {
    const double d = radius + 0.012 + 0.002;
    const double c = std::sqrt(0.5);
    return Vector3d(side * d * c, y, 0.042 + d * c);
  };
  constexpr double kBaseR = 0.042, kLidR = 0.0335;
  d.placement[0] = {{{0.0, side_tip(kBaseR, -0.038 + 0.045, -1.0)},
                     {0.0, side_tip(kBaseR, -0.022 + 0.045, -1.0)},
                     {0.0, side_tip(kBaseR, -0.006 + 0.045, -1.0)},
                     {kPi, side_tip(kBaseR, -0.022 + 0.045, 1.0)}}};
  d.placement[1] = {{{0.0, side_tip(kLidR, 0.016 - 0.045, -1.0)},
                     {0.0, side_tip(kLidR, 0.024 - 0.045, -1.0)},
                     {0.0, side_tip(kLidR, 0.032 - 0.045, -1.0)},
                     {kPi, side_tip(kLidR, 0.024 - 0.045, 1.0)}}};
  d.palm[0] = {0.0, -0.05, 0.05, -0.045, 0.045};
  d.palm[1] = {0.0, -0.05, 0.05, -0.045, 0.045};
  return d;
}

HandModel HandModel::build(const HandDescription& desc) {
  validate(desc.finger);
  validate(desc.thumb);
  HandModel m;
  for (int h = 0; h < kNumHands; ++h) {
    m.hand_bases[h] = Eigen::Isometry3d::Identity();
    m.hand_bases[h].translation() = desc.hand_base[h];
    sim::SupportPatch p = desc.palm[h];
    p.height += desc.hand_base[h].z();
    p.x_min += desc.hand_base[h].x();
    p.x_max += desc.hand_base[h].x();
    p.y_min += desc.hand_base[h].y();
    p.y_max += desc.hand_base[h].y();
    m.palms[h] = p;
    const bool mirrored = h == 0 && desc.mirror_left;
    for (int f = 0; f < kFingersPerHand; ++f) {
      const int idx = h * kFingersPerHand + f;
      FingerChain chain = f == 3 ? desc.thumb : desc.finger;
      FingerAngles canon = desc.canonical[f];
      if (mirrored) {
        const double lo = chain.joints[0].lower, hi = chain.joints[0].upper;
        chain.joints[0].lower = -hi;
        chain.joints[0].upper = -lo;
        canon[0] = -canon[0];
      }
      for (int j = 0; j < kJointsPerFinger; ++j) {
        if (canon[j] < chain.joints[j].lower || canon[j] > chain.joints[j].upper)
          throw std::invalid_argument("hand: canonical pose outside joint limits");
        m.lower[idx * 4 + j] = chain.joints[j].lower;
        m.upper[idx * 4 + j] = chain.joints[j].upper;
        m.canonical[idx * 4 + j] = canon[j];
      }
      m.chains[idx] = chain;
      // Yaw the mount so that the finger points along `pointing_yaw` at the
      // canonical abduction, then translate so the canonical tip lands on
      // its placement.
      const FingerPlacement& pl = desc.placement[h][f];
      Eigen::Isometry3d mount = yaw_transform(pl.pointing_yaw - canon[0]);
      const Vector3d tip = forward_kinematics(chain, canon, mount);
      mount.translation() = desc.hand_base[h] + pl.canonical_tip - tip;
      m.mounts[idx] = mount;
    }
  }
  return m;
}

FingerAngles finger_angles(const JointVector& q, int finger) {
  return {q[finger * 4], q[finger * 4 + 1], q[finger * 4 + 2], q[finger * 4 + 3]};
}

Vector3d fingertip_position(const HandModel& model, const JointVector& q, int finger) {
  return forward_kinematics(model.chains[finger], finger_angles(q, finger), model.mounts[finger]);
}

void update_fingertips(const HandModel& model, HandState& state) {
  for (int f = 0; f < kNumFingers; ++f) state.tips[f] = fingertip_position(model, state.q, f);
}

HandState make_hand_state(const HandModel& model, const JointVector& q) {
  HandState s;
  s.q = q.cwiseMax(model.lower).cwiseMin(model.upper);
  s.target = s.q;
  update_fingertips(model, s);
  return s;
}

HandState step_pd_targets(const HandModel& model, const HandState& state, const PdGains& gains, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_pd_targets: dt must be positive");
  HandState next = state;
  const JointVector acc =
      gains.kp.cwiseProduct(state.target - state.q) - gains.kd.cwiseProduct(state.qd);
  next.qd = state.qd + acc * dt;
  next.q = state.q + next.qd * dt;
  for (int i = 0; i < kNumJoints; ++i) {
    if (next.q[i] < model.lower[i]) {
      next.q[i] = model.lower[i];
      next.qd[i] = 0.0;
    } else if (next.q[i] > model.upper[i]) {
      next.q[i] = model.upper[i];
      next.qd[i] = 0.0;
    }
  }
  update_fingertips(model, next);
  return next;
}

JointVector pd_torque(const HandState& state, const PdGains& gains) {
  return gains.kp.cwiseProduct(state.target - state.q) - gains.kd.cwiseProduct(state.qd);
}

void apply_action(const HandModel& model, HandState& state, JointVector& ema,
                  const JointVector& action, const ActionParams& params) {
  const JointVector a = action.cwiseMax(-1.0).cwiseMin(1.0);
  ema = params.ema * ema + (1.0 - params.ema) * a;
  state.target = (state.target + params.scale * ema).cwiseMax(model.lower).cwiseMin(model.upper);
}

}  // namespace twist::hand
