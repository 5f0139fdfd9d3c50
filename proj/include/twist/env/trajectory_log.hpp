#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "twist/env/env.hpp"

namespace twist::env {

// Bottle pose and joint state recorded after every step, used to measure
// replay divergence.
using StateFingerprint = Eigen::Matrix<double, 9, 1>;  // position, quaternion w x y z, lid angle, lid velocity
StateFingerprint fingerprint(const EnvState& s);

struct StepRecord {
  int step = 0;
  JointVector action = JointVector::Zero();  // as passed to step (pre-noise)
  double reward = 0.0;
  RewardTerms terms;
  double lid_angle = 0.0;
  double alignment = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::kNone;
  StateFingerprint state = StateFingerprint::Zero();
};

// Newline-delimited JSON: a header line, one line per step, then an optional
// summary line.
//   {"type":"header","version":1,"config_hash":"..","seed":..,"config":{..},"initial_state":"<hex>"}
//   {"type":"step","t":..,"action":[..],"reward":..,"terms":{..},"lid_angle":..,
//    "alignment":..,"done":..,"reason":"..","state":[..]}
//   {"type":"summary",...}
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(out) {}

  void header(const EnvConfig& cfg, std::uint64_t seed, const EnvState& initial, const nlohmann::json& extra = {});
  void step(const JointVector& action, const Transition& tr, const EnvState& after);
  void summary(const nlohmann::json& fields);

 private:
  std::ostream& out_;
};

struct TrajectoryLog {
  nlohmann::json header;
  std::string config_hash;
  std::uint64_t seed = 0;
  EnvConfig config;
  EnvState initial;
  std::vector<StepRecord> steps;
  std::optional<nlohmann::json> summary;
};

// Throws std::runtime_error with the offending line number on malformed input.
TrajectoryLog read_trajectory(std::istream& in);

nlohmann::json step_record_json(const StepRecord& r);

}  // namespace twist::env
