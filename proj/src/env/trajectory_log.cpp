#include "twist/env/trajectory_log.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "twist/core/serialize.hpp"

namespace twist::env {

using nlohmann::json;

StateFingerprint fingerprint(const EnvState& s) {
  StateFingerprint f;
  const auto& r = s.bottle.root;
  f << r.position, r.orientation.w(), r.orientation.x(), r.orientation.y(), r.orientation.z(), s.bottle.lid_angle,
      s.bottle.lid_velocity;
  return f;
}

namespace {

json terms_json(const RewardTerms& t) {
  return {{"twist", t.twist}, {"contact", t.contact}, {"pose", t.pose}, {"work", t.work}, {"action", t.action}};
}

template <class V>
json vec(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class V>
void read_vec(const json& a, V& v) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != v.size())
    throw std::runtime_error("wrong vector length");
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = a.at(i).get<double>();
}

}  // namespace

json step_record_json(const StepRecord& r) {
  return {{"type", "step"},       {"t", r.step},
          {"action", vec(r.action)}, {"reward", r.reward},
          {"terms", terms_json(r.terms)}, {"lid_angle", r.lid_angle},
          {"alignment", r.alignment}, {"done", r.done},
          {"reason", to_string(r.reason)}, {"state", vec(r.state)}};
}

void TrajectoryWriter::header(const EnvConfig& cfg, std::uint64_t seed, const EnvState& initial, const json& extra) {
  json h = {{"type", "header"},
            {"version", 1},
            {"config_hash", hash_hex(config_hash(cfg))},
            {"seed", seed},
            {"config", to_json(cfg)},
            {"initial_state", to_hex(to_bytes(initial))}};
  for (auto it = extra.begin(); extra.is_object() && it != extra.end(); ++it) h[it.key()] = it.value();
  out_ << h.dump() << '\n';
}

void TrajectoryWriter::step(const JointVector& action, const Transition& tr, const EnvState& after) {
  StepRecord r;
  r.step = tr.step;
  r.action = action;
  r.reward = tr.reward_total;
  r.terms = tr.reward_terms;
  r.lid_angle = tr.lid_angle;
  r.alignment = tr.alignment;
  r.done = tr.done;
  r.reason = tr.done_reason;
  r.state = fingerprint(after);
  out_ << step_record_json(r).dump() << '\n';
}

void TrajectoryWriter::summary(const json& fields) {
  json s = fields;
  s["type"] = "summary";
  out_ << s.dump() << '\n';
}

TrajectoryLog read_trajectory(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw std::runtime_error("duplicate header");
        if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported log version");
        log.header = j;
        log.config_hash = j.at("config_hash").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        merge_json(log.config, j.at("config"));
        log.initial = from_bytes<EnvState>(from_hex(j.at("initial_state").get<std::string>()));
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw std::runtime_error("step before header");
        StepRecord r;
        r.step = j.at("t").get<int>();
        read_vec(j.at("action"), r.action);
        r.reward = j.at("reward").get<double>();
        const json& t = j.at("terms");
        r.terms = {t.at("twist").get<double>(), t.at("contact").get<double>(), t.at("pose").get<double>(),
                   t.at("work").get<double>(), t.at("action").get<double>()};
        r.lid_angle = j.at("lid_angle").get<double>();
        r.alignment = j.at("alignment").get<double>();
        r.done = j.at("done").get<bool>();
        r.reason = done_reason_from_string(j.at("reason").get<std::string>());
        read_vec(j.at("state"), r.state);
        log.steps.push_back(r);
      } else if (type == "summary") {
        log.summary = j;
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectory log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error("trajectory log: missing header");
  return log;
}

}  // namespace twist::env
