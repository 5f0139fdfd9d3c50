#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twist/env/env.hpp"

namespace twist::evalkit {

struct EpisodeMetrics {
  double ad = 0.0;   // degrees, rewarded direction only
  double ttf = 0.0;  // seconds
  double vel = 0.0;  // degrees per second
  std::string end = "none";  // low_z, align_fail, stuck, error, timeout, end_of_trace
};

struct MetricsConfig {
  double control_dt = 0.1;
  double trial_length = 30.0;   // s, TTF cap
  double stuck_window = 5.0;    // s
  double stuck_angle = 0.5;     // degrees over the window
  double align_angle = 0.4;     // rad; stuck also needs alignment above this
};

MetricsConfig metrics_config(const env::EnvConfig& cfg);

// State after each control step.
struct TraceSample {
  double lid_angle = 0.0;
  double alignment = 0.0;
  env::DoneReason reason = env::DoneReason::kNone;
};

inline TraceSample trace_sample(const env::Transition& tr) { return {tr.lid_angle, tr.alignment, tr.done_reason}; }

// The episode ends at the first drop (low_z), alignment failure, error or
// stuck window; otherwise at the end of the trace, capped at the trial
// length. AD = max(0, angle at the end - start angle) in degrees.
EpisodeMetrics compute_metrics(double start_angle, std::span<const TraceSample> trace, const MetricsConfig& cfg);

struct Summary {
  int n = 0;
  double ad_mean = 0.0, ad_std = 0.0;
  double ttf_mean = 0.0, ttf_std = 0.0;
  double vel_mean = 0.0, vel_std = 0.0;
};

// Population statistics (divide by n), summed in input order.
Summary summarize(std::span<const EpisodeMetrics> m);
double mean(std::span<const double> x);
double stddev(std::span<const double> x);

nlohmann::json to_json(const EpisodeMetrics& m);
nlohmann::json to_json(const Summary& s);

}  // namespace twist::evalkit
