#pragma once

#include "twist/env/config.hpp"

namespace twist::testing_support {

// Every random perturbation switched off: fixed object, no noise, no lag,
// no random force.
inline env::EnvConfig deterministic_config() {
  env::EnvConfig c;
  auto& dr = c.dr;
  c.objects.kind = env::ObjectSet::kSingle;
  dr.object_mass = {0.065, 0.065};
  dr.object_friction = {1.0, 1.0};
  dr.object_shape_scale = {1.0, 1.0};
  dr.object_init_position = 0.0;
  dr.object_init_z_orientation = 0.0;
  dr.hand_friction = {1.0, 1.0};
  dr.p_gain_scale = {1.0, 1.0};
  dr.d_gain_scale = {1.0, 1.0};
  dr.random_force.probability = 0.0;
  dr.keypoint_obs_noise = 0.0;
  dr.joint_obs_noise = 0.0;
  dr.action_noise = 0.0;
  dr.frame_lag_prob = 0.0;
  dr.action_lag_prob = 0.0;
  dr.brake_breakaway = {0.05, 0.05};
  dr.joint_init_noise = 0.0;
  return c;
}

}  // namespace twist::testing_support
