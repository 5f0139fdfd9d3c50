#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "twist/hand/hand.hpp"
#include "twist/simcore/contact.hpp"

namespace twist::env {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct RandomForceConfig {
  double scale = 2.0;        // times object mass
  double probability = 0.2;  // per interval
  double decay = 0.99;       // per interval
  double interval = 0.1;     // s
};

// Mirrors the domain-randomization table field for field. Ranges are
// absolute values unless named *_scale (multiplicative).
struct DomainRandomizationConfig {
  Range object_mass{0.03, 0.1};
  Range object_friction{0.5, 1.5};
  Range object_shape_scale{0.95, 1.05};
  double object_init_position = 0.02;  // +U(-x, x) per axis, m
  double object_init_z_orientation = 0.75;  // +U(-x, x), rad
  Range hand_friction{0.5, 1.5};
  Range p_gain_scale{0.8, 1.1};
  Range d_gain_scale{0.7, 1.2};
  RandomForceConfig random_force;
  double keypoint_obs_noise = 0.02;  // Gaussian std per axis, m
  double joint_obs_noise = 0.04;     // Gaussian std, rad
  double action_noise = 0.1;         // Gaussian std
  double frame_lag_prob = 0.1;
  double action_lag_prob = 0.1;
  // Not part of the table: brake and initial hand pose.
  Range brake_breakaway{0.03, 0.07};
  double joint_init_noise = 0.03;
};

enum class ObjectSet { kSingle, kMulti };

struct ObjectSetConfig {
  ObjectSet kind = ObjectSet::kMulti;
  // Single object, diameters and heights in metres.
  double base_diameter = 0.084, base_height = 0.060;
  double lid_diameter = 0.067, lid_height = 0.026;
  // Multi-object ranges.
  Range base_diameter_range{0.082, 0.086};
  Range base_height_range{0.055, 0.067};
  Range lid_diameter_range{0.062, 0.070};
  Range lid_height_range{0.020, 0.033};
};

struct RewardWeights {
  double contact = 2.5;
  double twist = 500.0;
  double pose = 20.0;
  double work = -0.001;
  double action = -1.0;
  double contact_sharpness = 25.0;  // 1/m
};

enum class ContactReward { kKeypoint, kGait };

struct EnvConfig {
  DomainRandomizationConfig dr;
  ObjectSetConfig objects;
  RewardWeights rewards;
  ContactReward contact_reward = ContactReward::kKeypoint;
  bool vision = true;  // keypoint observations available to the policy
  double control_dt = 0.1;
  int substeps = 20;
  int horizon = 300;
  double z_min_below_palm = 0.05;
  double align_angle = 0.4;
  double align_time = 3.0;
  Vector3d target_direction = Vector3d::UnitY();
  int keypoints_per_link = 8;
  sim::ContactParams contact;  // friction_coeff is overwritten per episode
  double kp = 20.0;
  double kd = 8.94427190999916;  // 2 sqrt(kp)
  hand::ActionParams action;
  double brake_kinetic_ratio = 0.8;
  double brake_viscous = 1e-4;
  double settle_time = 0.3;
  double drop_height = 0.005;
  int max_reset_attempts = 10;
  // Joint plane of the bottle at the default pose (world), axis along y.
  Vector3d default_joint_point = Vector3d(0.0, 0.01, 0.042);
  hand::HandDescription hand = hand::default_hand_description();
};

// Throws std::invalid_argument naming the offending field.
void validate(const EnvConfig& cfg);

nlohmann::json to_json(const EnvConfig& cfg);
// Fields absent from `j` keep the values already in `cfg`; unknown keys
// are rejected with a message naming the full key path.
void merge_json(EnvConfig& cfg, const nlohmann::json& j, const std::string& path = "env");

// Hash of the canonical JSON form, salted with the simulator format version.
std::uint64_t config_hash(const EnvConfig& cfg);

std::string to_string(ObjectSet kind);
ObjectSet object_set_from_string(const std::string& s);

}  // namespace twist::env
