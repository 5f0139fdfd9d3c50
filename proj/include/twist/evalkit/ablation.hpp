#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "twist/agent/ppo.hpp"
#include "twist/env/config.hpp"
#include "twist/evalkit/metrics.hpp"

namespace twist::evalkit {

struct TrainSpec {
  env::EnvConfig env;
  agent::PpoConfig ppo;
  int updates = 2000;
  int eval_every = 100;  // updates between curve points
  int eval_trials = 16;
  int threads = 0;
  std::string checkpoint_dir;  // final policy saved as <method>_seed<k>.ckpt when set
};

// Known methods: full, reduced_contact (contact weight x0.1), no_vision,
// gait (gait-constraint reward in place of the keypoint contact term),
// no_asym (critic sees the policy observation), large (actor widths x4).
// Throws std::invalid_argument for anything else.
void apply_method(const std::string& method, TrainSpec& spec);
const std::vector<std::string>& known_methods();

// Hash of everything that determines a run besides the seed (method already applied).
std::string spec_hash(const TrainSpec& spec);

struct CurvePoint {
  std::int64_t update = 0;
  double ad = 0.0;  // mean AD over the evaluation trials
};

struct TrainRun {
  std::string method;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<CurvePoint> curve;
  Summary final_eval;
  bool failed = false;
  std::string error;
};

using ProgressFn = std::function<void(const std::string& method, std::uint64_t seed, std::int64_t update, double ad)>;

// Trains from scratch with `seed`, evaluating every eval_every updates and
// at the end. A non-finite loss marks the run failed and keeps the curve so far.
TrainRun train_and_track(const TrainSpec& spec, const std::string& method, std::uint64_t seed,
                         const ProgressFn& progress = {});

struct MethodReport {
  std::string method;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<TrainRun> runs;
  // (update, mean AD, std AD) over the seeds that reached that update.
  std::vector<std::array<double, 3>> curve;
  double final_ad_mean = 0.0;
  double final_ad_std = 0.0;
  int failures = 0;
};

struct ExperimentReport {
  std::vector<MethodReport> methods;
  const MethodReport& at(const std::string& method) const;
};

// Fixed-order aggregation of finished runs, grouped by method in first-seen order.
ExperimentReport aggregate_runs(const std::vector<TrainRun>& runs);

ExperimentReport run_ablation_suite(const TrainSpec& base, const std::vector<std::string>& methods,
                                    const std::vector<std::uint64_t>& seeds, const ProgressFn& progress = {});

nlohmann::json to_json(const TrainRun& r);
nlohmann::json to_json(const ExperimentReport& r);
TrainRun train_run_from_json(const nlohmann::json& j);

// report.json, summary.csv and curves/<method>.csv under `dir`.
void write_report(const std::string& dir, const ExperimentReport& r);

}  // namespace twist::evalkit
