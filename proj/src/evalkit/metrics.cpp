#include "twist/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace twist::evalkit {

using env::DoneReason;

MetricsConfig metrics_config(const env::EnvConfig& cfg) {
  MetricsConfig m;
  m.control_dt = cfg.control_dt;
  m.trial_length = cfg.horizon * cfg.control_dt;
  m.align_angle = cfg.align_angle;
  return m;
}

EpisodeMetrics compute_metrics(double start_angle, std::span<const TraceSample> trace, const MetricsConfig& cfg) {
  EpisodeMetrics out;
  if (trace.empty()) {
    out.end = "end_of_trace";
    return out;
  }
  const auto window = static_cast<std::size_t>(std::lround(cfg.stuck_window / cfg.control_dt));
  const double stuck_rad = cfg.stuck_angle * kPi / 180.0;
  std::size_t end = trace.size() - 1;
  out.end = "end_of_trace";
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const TraceSample& s = trace[t];
    if (s.reason == DoneReason::kLowZ || s.reason == DoneReason::kAlignFail || s.reason == DoneReason::kError) {
      end = t;
      out.end = env::to_string(s.reason);
      break;
    }
    if (t >= window) {
      const double moved = std::abs(s.lid_angle - trace[t - window].lid_angle);
      if (moved < stuck_rad && s.alignment > cfg.align_angle) {
        end = t;
        out.end = "stuck";
        break;
      }
    }
    if (s.reason == DoneReason::kTimeout) {
      end = t;
      out.end = "timeout";
      break;
    }
  }
  out.ttf = std::min(cfg.trial_length, static_cast<double>(end + 1) * cfg.control_dt);
  out.ad = std::max(0.0, trace[end].lid_angle - start_angle) * 180.0 / kPi;
  out.vel = out.ttf > 0.0 ? out.ad / out.ttf : 0.0;
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

Summary summarize(std::span<const EpisodeMetrics> m) {
  std::vector<double> ad, ttf, vel;
  for (const auto& e : m) {
    ad.push_back(e.ad);
    ttf.push_back(e.ttf);
    vel.push_back(e.vel);
  }
  return {static_cast<int>(m.size()), mean(ad), stddev(ad), mean(ttf), stddev(ttf), mean(vel), stddev(vel)};
}

nlohmann::json to_json(const EpisodeMetrics& m) {
  return {{"ad", m.ad}, {"ttf", m.ttf}, {"vel", m.vel}, {"end", m.end}};
}

nlohmann::json to_json(const Summary& s) {
  return {{"n", s.n},          {"ad_mean", s.ad_mean},   {"ad_std", s.ad_std},   {"ttf_mean", s.ttf_mean},
          {"ttf_std", s.ttf_std}, {"vel_mean", s.vel_mean}, {"vel_std", s.vel_std}};
}

}  // namespace twist::evalkit
