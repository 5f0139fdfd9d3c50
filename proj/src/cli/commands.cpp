#include "twist/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "twist/agent/checkpoint.hpp"
#include "twist/cli/session.hpp"
#include "twist/core/json_fields.hpp"
#include "twist/core/serialize.hpp"
#include "twist/env/trajectory_log.hpp"
#include "twist/evalkit/ablation.hpp"
#include "twist/evalkit/evaluation.hpp"

namespace twist::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Error with an exit code and a short machine-readable kind.
struct CommandError : std::runtime_error {
  CommandError(int code, std::string kind, const std::string& msg)
      : std::runtime_error(msg), code(code), kind(std::move(kind)) {}
  int code;
  std::string kind;
};

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const CommandError& e) {
    return report_error(err, e.code, e.kind, e.what());
  } catch (const ConfigError& e) {
    return report_error(err, kExitConfig, "config", e.what());
  } catch (const agent::NonFiniteLoss& e) {
    return report_error(err, kExitNonFinite, "non_finite_loss", e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitInternal, "internal", e.what());
  }
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw CommandError(kExitIo, "io", "cannot create directory '" + p.string() + "': " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw CommandError(kExitIo, "io", "cannot write '" + p.string() + "'");
  f << text;
}

agent::Checkpoint read_ckpt(const std::string& path) {
  try {
    return agent::read_checkpoint(path);
  } catch (const std::exception& e) {
    throw CommandError(kExitIo, "checkpoint", e.what());
  }
}

std::string ckpt_name(std::int64_t update) {
  std::ostringstream s;
  s << "update_" << std::setw(6) << std::setfill('0') << update << ".ckpt";
  return s.str();
}

const char* kCurveHeader =
    "update,env_steps,mean_reward,episodes,mean_return,mean_length,mean_rotation_deg,errors,kl,clip_frac,"
    "actor_loss,critic_loss,entropy,learning_rate";

std::string curve_row(const agent::IterationStats& s, std::int64_t env_steps) {
  std::ostringstream o;
  o << std::setprecision(10) << s.update << ',' << env_steps << ',' << s.mean_reward << ',' << s.episodes.episodes
    << ',' << s.episodes.mean_return << ',' << s.episodes.mean_length << ',' << s.episodes.mean_rotation_deg << ','
    << s.episodes.errors << ',' << s.ppo.kl << ',' << s.ppo.clip_frac << ',' << s.ppo.actor_loss << ','
    << s.ppo.critic_loss << ',' << s.ppo.entropy << ',' << s.ppo.learning_rate;
  return o.str();
}

// Keeps the header and rows with update <= last.
void truncate_curve(const fs::path& p, std::int64_t last) {
  std::ifstream in(p);
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line)) {
    if (keep.empty()) {
      keep.push_back(line);
      continue;
    }
    if (std::stoll(line.substr(0, line.find(','))) <= last) keep.push_back(line);
  }
  std::ofstream out(p, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

}  // namespace

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(o.common.config, o.common.profile, o.common.seed);
    if (o.updates) cfg.train.updates = *o.updates;
    if (o.threads) cfg.train.threads = *o.threads;
    validate(cfg);

    const fs::path dir(o.common.out);
    ensure_dir(dir / "checkpoints");
    TrainingSession session(cfg, cfg.train.threads);
    const fs::path curve = dir / "curve.csv";
    if (o.resume) {
      const agent::Checkpoint c = read_ckpt(*o.resume);
      try {
        session.restore(c);
      } catch (const std::runtime_error& e) {
        throw CommandError(kExitMismatch, "checkpoint_mismatch", e.what());
      }
      if (fs::exists(curve))
        truncate_curve(curve, session.updates());
      else
        write_text(curve, std::string(kCurveHeader) + "\n");
    } else {
      session.start();
      write_text(curve, std::string(kCurveHeader) + "\n");
    }
    json cfg_doc = to_json(cfg);
    cfg_doc["config_hash"] = run_config_hash(cfg);
    cfg_doc["training_hash"] = training_hash(cfg);
    write_text(dir / "config.json", cfg_doc.dump(2) + "\n");

    std::ofstream curve_out(curve, std::ios::app);
    std::string last_good;
    auto save = [&] {
      const fs::path p = dir / "checkpoints" / ckpt_name(session.updates());
      agent::write_checkpoint(p.string(), session.checkpoint());
      agent::write_checkpoint((dir / "latest.ckpt").string(), session.checkpoint());
      last_good = p.string();
    };
    if (!o.resume) save();
    while (session.updates() < cfg.train.updates) {
      agent::IterationStats s;
      try {
        s = session.iterate();
      } catch (const agent::NonFiniteLoss& e) {
        throw CommandError(kExitNonFinite, "non_finite_loss",
                           std::string(e.what()) + "; last good checkpoint: " + last_good);
      }
      curve_out << curve_row(s, std::int64_t(s.update) * cfg.ppo.horizon * cfg.ppo.num_envs) << '\n';
      curve_out.flush();
      out << "update " << s.update << "/" << cfg.train.updates << " reward " << s.mean_reward << " rotation "
          << s.episodes.mean_rotation_deg << " deg kl " << s.ppo.kl << " lr " << s.ppo.learning_rate << '\n';
      if (s.update % cfg.train.checkpoint_every == 0 || s.update == cfg.train.updates) save();
    }
    const fs::path final_path = dir / "final.ckpt";
    agent::write_checkpoint(final_path.string(), session.checkpoint());
    out << json{{"checkpoint", final_path.string()},
                {"updates", session.updates()},
                {"config_hash", run_config_hash(cfg)},
                {"seed", cfg.seed},
                {"params_hash", hash_hex(session.agent().state_hash())}}
               .dump()
        << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const agent::Checkpoint ckpt = read_ckpt(o.checkpoint);
    RunConfig cfg = run_config_from_checkpoint(ckpt);
    if (o.common.config) {
      const RunConfig given = load_run_config(o.common.config, o.common.profile, cfg.seed);
      if (agent::to_json(given.ppo) != agent::to_json(cfg.ppo) ||
          given.env.keypoints_per_link != cfg.env.keypoints_per_link)
        throw CommandError(kExitMismatch, "checkpoint_mismatch",
                           "the checkpoint's network configuration differs from '" + *o.common.config + "'");
      cfg.env = given.env;
      cfg.eval = given.eval;
    }
    if (o.objects) cfg.env.objects.kind = env::object_set_from_string(*o.objects);
    const int trials = o.trials.value_or(cfg.eval.trials);
    if (trials < 0) throw ConfigError("--trials: must be >= 0");
    const std::uint64_t seed = o.common.seed.value_or(cfg.seed);
    const int threads = o.threads.value_or(cfg.train.threads);
    agent::PpoAgent policy = [&] {
      try {
        return load_policy(ckpt, cfg);
      } catch (const std::runtime_error& e) {
        throw CommandError(kExitMismatch, "checkpoint_mismatch", e.what());
      }
    }();

    const env::LidTwistEnv env(cfg.env);
    const fs::path dir(o.common.out);
    ensure_dir(dir);
    std::vector<evalkit::TrialResult> results(trials);
    if (o.write_logs && trials > 0) {
      ensure_dir(dir / "logs");
      for (int k = 0; k < trials; ++k) {
        std::ostringstream name;
        name << "trial_" << std::setw(3) << std::setfill('0') << k << ".ndjson";
        std::ofstream log(dir / "logs" / name.str(), std::ios::trunc);
        results[k] = evalkit::run_policy_trial(env, policy, evalkit::trial_initial_state(env, seed, k), k, seed, &log);
      }
    } else {
      results = evalkit::evaluate_policy(env, policy, trials, seed, threads);
    }

    std::ostringstream csv;
    csv << "trial,ad,ttf,vel,end\n" << std::setprecision(12);
    for (const auto& r : results)
      csv << r.trial << ',' << r.metrics.ad << ',' << r.metrics.ttf << ',' << r.metrics.vel << ',' << r.metrics.end
          << '\n';
    write_text(dir / "trials.csv", csv.str());

    const auto metrics = evalkit::metrics_of(results);
    json summary = {{"config_hash", run_config_hash(cfg)},
                    {"checkpoint", o.checkpoint},
                    {"checkpoint_hash", ckpt.config_hash},
                    {"seed", seed},
                    {"objects", env::to_string(cfg.env.objects.kind)},
                    {"trials", trials},
                    {"policy", evalkit::to_json(evalkit::summarize(metrics))}};
    if (o.replay_baseline && trials > 0) {
      const auto replay = evalkit::run_replay_baseline(env, results, cfg.eval.replay_trials, seed, threads);
      summary["replay"] = evalkit::to_json(evalkit::summarize(evalkit::metrics_of(replay.trials)));
      summary["replay"]["source_trial"] = replay.source_trial;
    }
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    out << summary.dump() << '\n';
    return kExitOk;
  });
}

int cmd_replay(const ReplayOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(o.log);
    if (!in) throw CommandError(kExitIo, "io", "cannot open trajectory log '" + o.log + "'");
    env::TrajectoryLog log;
    try {
      log = env::read_trajectory(in);
    } catch (const ConfigError& e) {
      throw CommandError(kExitMismatch, "config_mismatch", e.what());
    }
    const std::string expected = hash_hex(env::config_hash(log.config));
    if (expected != log.config_hash)
      throw CommandError(kExitMismatch, "hash_mismatch",
                         "log config hash " + log.config_hash + " does not match this build's hash " + expected +
                             " of the embedded configuration; the log was written by a different simulator version "
                             "or edited");

    const env::LidTwistEnv env(log.config);
    env::EnvState s = log.initial;
    env::Transition tr;
    double max_div = 0.0;
    int first_div = -1;
    std::vector<evalkit::TraceSample> trace;
    for (std::size_t k = 0; k < log.steps.size(); ++k) {
      const auto& rec = log.steps[k];
      env.step(s, rec.action, tr);
      trace.push_back(evalkit::trace_sample(tr));
      const double d = std::max({(env::fingerprint(s) - rec.state).cwiseAbs().maxCoeff(),
                                 std::abs(tr.reward_total - rec.reward), std::abs(tr.lid_angle - rec.lid_angle)});
      if (!(d == 0.0) && first_div < 0) first_div = static_cast<int>(k);
      if (!(d <= max_div)) max_div = std::isnan(d) ? INFINITY : d;
      if (tr.done) break;
    }
    const evalkit::EpisodeMetrics m =
        evalkit::compute_metrics(log.initial.start_angle, trace, evalkit::metrics_config(log.config));
    json report = {{"log", o.log},
                   {"config_hash", log.config_hash},
                   {"seed", log.seed},
                   {"steps", trace.size()},
                   {"max_divergence", max_div},
                   {"first_divergent_step", first_div},
                   {"metrics", evalkit::to_json(m)}};
    bool metrics_match = true;
    if (log.summary && log.summary->contains("metrics")) {
      const json& lm = (*log.summary)["metrics"];
      metrics_match = lm.at("ad").get<double>() == m.ad && lm.at("ttf").get<double>() == m.ttf &&
                      lm.at("vel").get<double>() == m.vel && lm.at("end").get<std::string>() == m.end;
      report["logged_metrics"] = lm;
      report["metrics_match"] = metrics_match;
    }
    if (o.out) {
      ensure_dir(*o.out);
      write_text(fs::path(*o.out) / "replay.json", report.dump(2) + "\n");
    }
    out << report.dump() << '\n';
    return (max_div == 0.0 && metrics_match) ? kExitOk : kExitDiverged;
  });
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(o.common.config, o.common.profile, o.common.seed);
    if (o.num_envs < 1 || o.steps < 1 || o.repeats < 1) throw ConfigError("bench: counts must be >= 1");
    const int threads = o.threads.value_or(cfg.train.threads);
    using clock = std::chrono::steady_clock;

    env::VectorEnv venv(cfg.env, o.num_envs, cfg.seed, threads);
    venv.reset();
    Rng rng(cfg.seed);
    Eigen::MatrixXd actions(kNumJoints, o.num_envs);
    env::VectorStep step;
    std::vector<double> env_rates;
    for (int r = 0; r < o.repeats; ++r) {
      double seconds = 0.0;
      for (int k = 0; k < o.steps; ++k) {
        for (Eigen::Index i = 0; i < actions.size(); ++i) actions.data()[i] = rng.uniform(-1.0, 1.0);
        const auto t0 = clock::now();
        venv.step(actions, step);
        seconds += std::chrono::duration<double>(clock::now() - t0).count();
      }
      env_rates.push_back(double(o.steps) * o.num_envs / seconds);
    }

    // PPO update on a synthetic rollout of the configured size.
    agent::PpoAgent agent(env::kPolicyObsDim, static_cast<int>(venv.priv_obs().rows()), kNumJoints, cfg.ppo,
                          agent_seed(cfg.seed));
    agent::RolloutBuffer buf;
    const int T = cfg.ppo.horizon, N = cfg.ppo.num_envs;
    buf.allocate(T, N, env::kPolicyObsDim, static_cast<int>(venv.priv_obs().rows()), kNumJoints);
    auto fill = [&](auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    };
    fill(buf.obs);
    fill(buf.critic_obs);
    fill(buf.actions);
    fill(buf.values);
    fill(buf.rewards);
    fill(buf.bootstrap);
    buf.means.setZero();
    buf.dones.setZero();
    buf.behaviour_log_std = agent.actor().effective_log_std();
    buf.log_probs = agent::gaussian_log_prob(buf.means, buf.behaviour_log_std, buf.actions);
    std::vector<double> update_times;
    for (int r = 0; r < o.repeats; ++r) {
      agent::PpoAgent a = agent;
      const auto t0 = clock::now();
      a.update(buf);
      update_times.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    }

    json report = {{"config_hash", run_config_hash(cfg)},
                   {"profile", to_string(cfg.profile)},
                   {"seed", cfg.seed},
                   {"num_envs", o.num_envs},
                   {"threads", venv.threads()},
                   {"env_steps_per_s", median(env_rates)},
                   {"env_steps_per_s_samples", env_rates},
                   {"ppo_update_s", median(update_times)},
                   {"ppo_update_s_samples", update_times},
                   {"ppo_batch", T * N}};
    int code = kExitOk;
    if (o.baseline) {
      std::ifstream in(*o.baseline);
      if (!in) throw CommandError(kExitIo, "io", "cannot open baseline '" + *o.baseline + "'");
      const json base = json::parse(in);
      const double ref = base.at("env_steps_per_s").get<double>();
      const double ratio = median(env_rates) / ref;
      report["baseline_env_steps_per_s"] = ref;
      report["ratio"] = ratio;
      report["regression"] = ratio < 0.8;
      if (ratio < 0.8) code = kExitRegression;
    }
    ensure_dir(o.common.out);
    write_text(fs::path(o.common.out) / "bench.json", report.dump(2) + "\n");
    out << report.dump() << '\n';
    return code;
  });
}

int cmd_ablate(const AblateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(o.common.config, o.common.profile, o.common.seed);
    if (o.methods) cfg.ablation.methods = *o.methods;
    if (o.seeds) cfg.ablation.seeds = *o.seeds;
    if (o.updates) cfg.ablation.updates = *o.updates;
    if (o.threads) cfg.train.threads = *o.threads;
    validate(cfg);

    const fs::path dir(o.common.out);
    ensure_dir(dir / "runs");
    evalkit::TrainSpec spec = ablation_spec(cfg);
    spec.checkpoint_dir = (dir / "checkpoints").string();
    write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");

    std::vector<evalkit::TrainRun> runs;
    for (const auto& method : cfg.ablation.methods) {
      for (auto seed : cfg.ablation.seeds) {
        const fs::path rp = dir / "runs" / (method + "_seed" + std::to_string(seed) + ".json");
        evalkit::TrainSpec probe = spec;
        evalkit::apply_method(method, probe);
        if (fs::exists(rp)) {
          // Finished earlier with the same settings: reuse.
          std::ifstream in(rp);
          evalkit::TrainRun r = evalkit::train_run_from_json(json::parse(in));
          if (!r.failed && r.config_hash == evalkit::spec_hash(probe) && !r.curve.empty() &&
              r.curve.back().update == spec.updates) {
            out << "reuse " << rp.string() << '\n';
            runs.push_back(std::move(r));
            continue;
          }
        }
        out << "train " << method << " seed " << seed << '\n';
        out.flush();
        evalkit::TrainRun r = evalkit::train_and_track(spec, method, seed, [&](const std::string& m, std::uint64_t s,
                                                                                std::int64_t u, double ad) {
          out << "  " << m << " seed " << s << " update " << u << " AD " << ad << '\n';
          out.flush();
        });
        write_text(rp, evalkit::to_json(r).dump(2) + "\n");
        runs.push_back(std::move(r));
      }
    }
    const evalkit::ExperimentReport report = evalkit::aggregate_runs(runs);
    evalkit::write_report(dir.string(), report);
    for (const auto& m : report.methods)
      out << m.method << ": final AD " << m.final_ad_mean << " +- " << m.final_ad_std << " (" << m.runs.size()
          << " seeds, " << m.failures << " failed)\n";
    return kExitOk;
  });
}

}  // namespace twist::cli
