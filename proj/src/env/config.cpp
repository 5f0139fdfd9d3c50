#include "twist/env/config.hpp"

#include <cmath>

#include "twist/core/json_fields.hpp"
#include "twist/core/serialize.hpp"

namespace twist::env {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

void check_range(const Range& r, const std::string& field, bool positive = false) {
  check(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi, field, "range needs lo <= hi");
  if (positive) check(r.lo > 0.0, field, "range must be positive");
}

void check_prob(double p, const std::string& field) {
  check(p >= 0.0 && p <= 1.0, field, "probability must lie in [0, 1]");
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

void read_range(const json& v, const std::string& path, Range& out) {
  std::array<double, 2> a{out.lo, out.hi};
  JsonFields::read(v, path, a);
  out = {a[0], a[1]};
}

struct RangeField {
  JsonFields& f;
  void operator()(const std::string& key, Range& r) {
    f.nested(key, [&](const json& v, const std::string& p) { read_range(v, p, r); });
  }
};

json chain_json(const hand::FingerChain& c) {
  json joints = json::array();
  for (const auto& j : c.joints)
    joints.push_back({{"axis", vec_json(j.axis)}, {"link_length", j.link_length}, {"lower", j.lower}, {"upper", j.upper}});
  return {{"joints", joints}, {"tip_radius", c.tip_radius}};
}

void merge_chain(hand::FingerChain& c, const json& j, const std::string& path) {
  JsonFields f(j, path);
  f.nested("joints", [&](const json& arr, const std::string& p) {
    if (!arr.is_array() || arr.size() != c.joints.size()) throw ConfigError(p + ": expected 4 joints");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonFields jf(arr[i], p + "[" + std::to_string(i) + "]");
      jf.get("axis", c.joints[i].axis);
      jf.get("link_length", c.joints[i].link_length);
      jf.get("lower", c.joints[i].lower);
      jf.get("upper", c.joints[i].upper);
      jf.finish();
    }
  });
  f.get("tip_radius", c.tip_radius);
  f.finish();
}

json patch_json(const sim::SupportPatch& p) {
  return {{"height", p.height},
          {"x", json::array({p.x_min, p.x_max})},
          {"y", json::array({p.y_min, p.y_max})},
          {"thickness", p.thickness}};
}

void merge_patch(sim::SupportPatch& p, const json& j, const std::string& path) {
  JsonFields f(j, path);
  f.get("height", p.height);
  f.get("thickness", p.thickness);
  std::array<double, 2> x{p.x_min, p.x_max}, y{p.y_min, p.y_max};
  f.get("x", x);
  f.get("y", y);
  f.finish();
  p.x_min = x[0];
  p.x_max = x[1];
  p.y_min = y[0];
  p.y_max = y[1];
}

json hand_json(const hand::HandDescription& d) {
  json placement = json::array();
  for (const auto& hand : d.placement) {
    json fingers = json::array();
    for (const auto& pl : hand)
      fingers.push_back({{"pointing_yaw", pl.pointing_yaw}, {"canonical_tip", vec_json(pl.canonical_tip)}});
    placement.push_back(fingers);
  }
  json canonical = json::array();
  for (const auto& c : d.canonical) canonical.push_back(json(c));
  return {{"finger", chain_json(d.finger)},
          {"thumb", chain_json(d.thumb)},
          {"canonical", canonical},
          {"mirror_left", d.mirror_left},
          {"hand_base", json::array({vec_json(d.hand_base[0]), vec_json(d.hand_base[1])})},
          {"placement", placement},
          {"palm", json::array({patch_json(d.palm[0]), patch_json(d.palm[1])})}};
}

void merge_hand(hand::HandDescription& d, const json& j, const std::string& path) {
  JsonFields f(j, path);
  f.nested("finger", [&](const json& v, const std::string& p) { merge_chain(d.finger, v, p); });
  f.nested("thumb", [&](const json& v, const std::string& p) { merge_chain(d.thumb, v, p); });
  f.get("canonical", d.canonical);
  f.get("mirror_left", d.mirror_left);
  f.get("hand_base", d.hand_base);
  f.nested("placement", [&](const json& v, const std::string& p) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(p + ": expected 2 hands");
    for (int h = 0; h < 2; ++h) {
      const std::string ph = p + "[" + std::to_string(h) + "]";
      if (!v[h].is_array() || v[h].size() != 4) throw ConfigError(ph + ": expected 4 fingers");
      for (int k = 0; k < 4; ++k) {
        JsonFields pf(v[h][k], ph + "[" + std::to_string(k) + "]");
        pf.get("pointing_yaw", d.placement[h][k].pointing_yaw);
        pf.get("canonical_tip", d.placement[h][k].canonical_tip);
        pf.finish();
      }
    }
  });
  f.nested("palm", [&](const json& v, const std::string& p) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(p + ": expected 2 palms");
    for (int h = 0; h < 2; ++h) merge_patch(d.palm[h], v[h], p + "[" + std::to_string(h) + "]");
  });
  f.finish();
}

}  // namespace

std::string to_string(ObjectSet kind) { return kind == ObjectSet::kSingle ? "single" : "multi"; }

ObjectSet object_set_from_string(const std::string& s) {
  if (s == "single") return ObjectSet::kSingle;
  if (s == "multi") return ObjectSet::kMulti;
  throw ConfigError("object set must be 'single' or 'multi', got '" + s + "'");
}

void validate(const EnvConfig& c) {
  const auto& dr = c.dr;
  check_range(dr.object_mass, "env.dr.object_mass", true);
  check_range(dr.object_friction, "env.dr.object_friction", true);
  check_range(dr.object_shape_scale, "env.dr.object_shape_scale", true);
  check(dr.object_init_position >= 0.0, "env.dr.object_init_position", "must be >= 0");
  check(dr.object_init_z_orientation >= 0.0, "env.dr.object_init_z_orientation", "must be >= 0");
  check_range(dr.hand_friction, "env.dr.hand_friction", true);
  check_range(dr.p_gain_scale, "env.dr.p_gain_scale", true);
  check_range(dr.d_gain_scale, "env.dr.d_gain_scale", true);
  check(dr.random_force.scale >= 0.0, "env.dr.random_force.scale", "must be >= 0");
  check_prob(dr.random_force.probability, "env.dr.random_force.probability");
  check(dr.random_force.decay >= 0.0 && dr.random_force.decay <= 1.0, "env.dr.random_force.decay", "must lie in [0, 1]");
  check(dr.random_force.interval > 0.0, "env.dr.random_force.interval", "must be > 0");
  check(dr.keypoint_obs_noise >= 0.0, "env.dr.keypoint_obs_noise", "must be >= 0");
  check(dr.joint_obs_noise >= 0.0, "env.dr.joint_obs_noise", "must be >= 0");
  check(dr.action_noise >= 0.0, "env.dr.action_noise", "must be >= 0");
  check_prob(dr.frame_lag_prob, "env.dr.frame_lag_prob");
  check_prob(dr.action_lag_prob, "env.dr.action_lag_prob");
  check_range(dr.brake_breakaway, "env.dr.brake_breakaway", true);
  check(dr.joint_init_noise >= 0.0, "env.dr.joint_init_noise", "must be >= 0");

  const auto& o = c.objects;
  check(o.base_diameter > 0 && o.base_height > 0 && o.lid_diameter > 0 && o.lid_height > 0,
        "env.objects", "single-object dimensions must be positive");
  check_range(o.base_diameter_range, "env.objects.base_diameter_range", true);
  check_range(o.base_height_range, "env.objects.base_height_range", true);
  check_range(o.lid_diameter_range, "env.objects.lid_diameter_range", true);
  check_range(o.lid_height_range, "env.objects.lid_height_range", true);

  check(c.rewards.work <= 0.0, "env.rewards.work", "penalty weight must be <= 0");
  check(c.rewards.action <= 0.0, "env.rewards.action", "penalty weight must be <= 0");
  check(c.rewards.contact_sharpness > 0.0, "env.rewards.contact_sharpness", "must be > 0");
  check(c.control_dt > 0.0, "env.control_dt", "must be > 0");
  check(c.substeps >= 1, "env.substeps", "must be >= 1");
  check(c.horizon >= 1, "env.horizon", "must be >= 1");
  check(c.align_angle > 0.0, "env.align_angle", "must be > 0");
  check(c.align_time >= 0.0, "env.align_time", "must be >= 0");
  check(std::abs(c.target_direction.norm() - 1.0) < 1e-9, "env.target_direction", "must be a unit vector");
  check(c.keypoints_per_link >= 1, "env.keypoints_per_link", "must be >= 1");
  check(c.contact.stiffness > 0.0, "env.contact.stiffness", "must be > 0");
  check(c.contact.damping >= 0.0, "env.contact.damping", "must be >= 0");
  check(c.contact.slip_velocity_scale > 0.0, "env.contact.slip_velocity_scale", "must be > 0");
  check(c.kp > 0.0 && c.kd >= 0.0, "env.kp", "PD gains must be positive");
  check(c.action.scale > 0.0, "env.action.scale", "must be > 0");
  check(c.action.ema >= 0.0 && c.action.ema < 1.0, "env.action.ema", "must lie in [0, 1)");
  check(c.brake_kinetic_ratio > 0.0 && c.brake_kinetic_ratio <= 1.0, "env.brake_kinetic_ratio", "must lie in (0, 1]");
  check(c.brake_viscous >= 0.0, "env.brake_viscous", "must be >= 0");
  check(c.settle_time >= 0.0, "env.settle_time", "must be >= 0");
  check(c.max_reset_attempts >= 1, "env.max_reset_attempts", "must be >= 1");
}

json to_json(const EnvConfig& c) {
  const auto& dr = c.dr;
  json jdr = {
      {"object_mass", range_json(dr.object_mass)},
      {"object_friction", range_json(dr.object_friction)},
      {"object_shape_scale", range_json(dr.object_shape_scale)},
      {"object_init_position", dr.object_init_position},
      {"object_init_z_orientation", dr.object_init_z_orientation},
      {"hand_friction", range_json(dr.hand_friction)},
      {"p_gain_scale", range_json(dr.p_gain_scale)},
      {"d_gain_scale", range_json(dr.d_gain_scale)},
      {"random_force",
       {{"scale", dr.random_force.scale},
        {"probability", dr.random_force.probability},
        {"decay", dr.random_force.decay},
        {"interval", dr.random_force.interval}}},
      {"keypoint_obs_noise", dr.keypoint_obs_noise},
      {"joint_obs_noise", dr.joint_obs_noise},
      {"action_noise", dr.action_noise},
      {"frame_lag_prob", dr.frame_lag_prob},
      {"action_lag_prob", dr.action_lag_prob},
      {"brake_breakaway", range_json(dr.brake_breakaway)},
      {"joint_init_noise", dr.joint_init_noise},
  };
  const auto& o = c.objects;
  json jo = {{"kind", to_string(o.kind)},
             {"base_diameter", o.base_diameter},
             {"base_height", o.base_height},
             {"lid_diameter", o.lid_diameter},
             {"lid_height", o.lid_height},
             {"base_diameter_range", range_json(o.base_diameter_range)},
             {"base_height_range", range_json(o.base_height_range)},
             {"lid_diameter_range", range_json(o.lid_diameter_range)},
             {"lid_height_range", range_json(o.lid_height_range)}};
  const auto& r = c.rewards;
  json jr = {{"contact", r.contact}, {"twist", r.twist},   {"pose", r.pose},
             {"work", r.work},       {"action", r.action}, {"contact_sharpness", r.contact_sharpness}};
  return {
      {"dr", jdr},
      {"objects", jo},
      {"rewards", jr},
      {"contact_reward", c.contact_reward == ContactReward::kKeypoint ? "keypoint" : "gait"},
      {"vision", c.vision},
      {"control_dt", c.control_dt},
      {"substeps", c.substeps},
      {"horizon", c.horizon},
      {"z_min_below_palm", c.z_min_below_palm},
      {"align_angle", c.align_angle},
      {"align_time", c.align_time},
      {"target_direction", vec_json(c.target_direction)},
      {"keypoints_per_link", c.keypoints_per_link},
      {"contact",
       {{"stiffness", c.contact.stiffness},
        {"damping", c.contact.damping},
        {"slip_velocity_scale", c.contact.slip_velocity_scale}}},
      {"kp", c.kp},
      {"kd", c.kd},
      {"action", {{"scale", c.action.scale}, {"ema", c.action.ema}}},
      {"brake_kinetic_ratio", c.brake_kinetic_ratio},
      {"brake_viscous", c.brake_viscous},
      {"settle_time", c.settle_time},
      {"drop_height", c.drop_height},
      {"max_reset_attempts", c.max_reset_attempts},
      {"default_joint_point", vec_json(c.default_joint_point)},
      {"hand", hand_json(c.hand)},
  };
}

void merge_json(EnvConfig& c, const json& j, const std::string& path) {
  JsonFields f(j, path);
  f.nested("dr", [&](const json& v, const std::string& p) {
    auto& dr = c.dr;
    JsonFields g(v, p);
    RangeField range{g};
    range("object_mass", dr.object_mass);
    range("object_friction", dr.object_friction);
    range("object_shape_scale", dr.object_shape_scale);
    g.get("object_init_position", dr.object_init_position);
    g.get("object_init_z_orientation", dr.object_init_z_orientation);
    range("hand_friction", dr.hand_friction);
    range("p_gain_scale", dr.p_gain_scale);
    range("d_gain_scale", dr.d_gain_scale);
    g.nested("random_force", [&](const json& rv, const std::string& rp) {
      JsonFields h(rv, rp);
      h.get("scale", dr.random_force.scale);
      h.get("probability", dr.random_force.probability);
      h.get("decay", dr.random_force.decay);
      h.get("interval", dr.random_force.interval);
      h.finish();
    });
    g.get("keypoint_obs_noise", dr.keypoint_obs_noise);
    g.get("joint_obs_noise", dr.joint_obs_noise);
    g.get("action_noise", dr.action_noise);
    g.get("frame_lag_prob", dr.frame_lag_prob);
    g.get("action_lag_prob", dr.action_lag_prob);
    range("brake_breakaway", dr.brake_breakaway);
    g.get("joint_init_noise", dr.joint_init_noise);
    g.finish();
  });
  f.nested("objects", [&](const json& v, const std::string& p) {
    auto& o = c.objects;
    JsonFields g(v, p);
    RangeField range{g};
    std::string kind = to_string(o.kind);
    g.get("kind", kind);
    try {
      o.kind = object_set_from_string(kind);
    } catch (const ConfigError& e) {
      throw ConfigError(p + ".kind: " + e.what());
    }
    g.get("base_diameter", o.base_diameter);
    g.get("base_height", o.base_height);
    g.get("lid_diameter", o.lid_diameter);
    g.get("lid_height", o.lid_height);
    range("base_diameter_range", o.base_diameter_range);
    range("base_height_range", o.base_height_range);
    range("lid_diameter_range", o.lid_diameter_range);
    range("lid_height_range", o.lid_height_range);
    g.finish();
  });
  f.nested("rewards", [&](const json& v, const std::string& p) {
    auto& r = c.rewards;
    JsonFields g(v, p);
    g.get("contact", r.contact);
    g.get("twist", r.twist);
    g.get("pose", r.pose);
    g.get("work", r.work);
    g.get("action", r.action);
    g.get("contact_sharpness", r.contact_sharpness);
    g.finish();
  });
  std::string contact_reward = c.contact_reward == ContactReward::kKeypoint ? "keypoint" : "gait";
  f.get("contact_reward", contact_reward);
  if (contact_reward == "keypoint") c.contact_reward = ContactReward::kKeypoint;
  else if (contact_reward == "gait") c.contact_reward = ContactReward::kGait;
  else throw ConfigError(f.child("contact_reward") + ": must be 'keypoint' or 'gait'");
  f.get("vision", c.vision);
  f.get("control_dt", c.control_dt);
  f.get("substeps", c.substeps);
  f.get("horizon", c.horizon);
  f.get("z_min_below_palm", c.z_min_below_palm);
  f.get("align_angle", c.align_angle);
  f.get("align_time", c.align_time);
  f.get("target_direction", c.target_direction);
  f.get("keypoints_per_link", c.keypoints_per_link);
  f.nested("contact", [&](const json& v, const std::string& p) {
    JsonFields g(v, p);
    g.get("stiffness", c.contact.stiffness);
    g.get("damping", c.contact.damping);
    g.get("slip_velocity_scale", c.contact.slip_velocity_scale);
    g.finish();
  });
  f.get("kp", c.kp);
  f.get("kd", c.kd);
  f.nested("action", [&](const json& v, const std::string& p) {
    JsonFields g(v, p);
    g.get("scale", c.action.scale);
    g.get("ema", c.action.ema);
    g.finish();
  });
  f.get("brake_kinetic_ratio", c.brake_kinetic_ratio);
  f.get("brake_viscous", c.brake_viscous);
  f.get("settle_time", c.settle_time);
  f.get("drop_height", c.drop_height);
  f.get("max_reset_attempts", c.max_reset_attempts);
  f.get("default_joint_point", c.default_joint_point);
  f.nested("hand", [&](const json& v, const std::string& p) { merge_hand(c.hand, v, p); });
  f.finish();
}

std::uint64_t config_hash(const EnvConfig& cfg) {
  return fnv1a64("twist-env-v1\n" + to_json(cfg).dump());
}

}  // namespace twist::env
