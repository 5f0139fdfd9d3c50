#include "twist/evalkit/evaluation.hpp"

#include <optional>
#include <ostream>

#include "twist/core/thread_pool.hpp"

namespace twist::evalkit {

env::EnvState trial_initial_state(const env::LidTwistEnv& env, std::uint64_t seed, int trial) {
  return env.reset_episode(Rng::stream(seed, 0x7e57000000000000ULL + static_cast<std::uint64_t>(trial)));
}

namespace {

template <class Policy>
TrialResult run_trial(const env::LidTwistEnv& env, env::EnvState s, int trial, std::uint64_t seed,
                      std::ostream* log, Policy&& policy) {
  TrialResult out;
  out.trial = trial;
  const double start = s.start_angle;
  env::PolicyObservation obs;
  env::PrivilegedObservation priv;
  env.build_observation(s, obs, priv);
  // Logged after the first observation so that replaying the actions from
  // this state consumes the same random stream.
  std::optional<env::TrajectoryWriter> writer;
  if (log) {
    writer.emplace(*log);
    writer->header(env.config(), seed, s, {{"trial", trial}});
  }
  env::Transition tr;
  for (int t = 0; t < env.config().horizon; ++t) {
    const JointVector a = policy(t, obs.values);
    env.step(s, a, tr);
    out.actions.push_back(a);
    out.trace.push_back(trace_sample(tr));
    if (writer) writer->step(a, tr, s);
    obs = tr.obs;
    if (tr.done) break;
  }
  out.metrics = compute_metrics(start, out.trace, metrics_config(env.config()));
  if (writer) writer->summary({{"start_angle", start}, {"metrics", to_json(out.metrics)}});
  return out;
}

}  // namespace

TrialResult run_policy_trial(const env::LidTwistEnv& env, const agent::PpoAgent& agent, env::EnvState state,
                             int trial, std::uint64_t seed, std::ostream* log) {
  return run_trial(env, std::move(state), trial, seed, log, [&](int, const Eigen::VectorXd& obs) -> JointVector {
    return agent.mean_action(obs).col(0);
  });
}

TrialResult run_open_loop_trial(const env::LidTwistEnv& env, std::span<const JointVector> actions,
                                env::EnvState state, int trial, std::uint64_t seed, std::ostream* log) {
  return run_trial(env, std::move(state), trial, seed, log, [&](int t, const Eigen::VectorXd&) -> JointVector {
    return t < static_cast<int>(actions.size()) ? actions[t] : JointVector::Zero();
  });
}

std::vector<TrialResult> evaluate_policy(const env::LidTwistEnv& env, const agent::PpoAgent& agent, int trials,
                                         std::uint64_t seed, int threads) {
  std::vector<TrialResult> out(std::max(0, trials));
  ThreadPool pool(threads);
  pool.parallel_for(out.size(), [&](std::size_t i) {
    const int k = static_cast<int>(i);
    try {
      out[i] = run_policy_trial(env, agent, trial_initial_state(env, seed, k), k, seed);
    } catch (const std::exception&) {
      out[i].trial = k;
      out[i].metrics.end = "error";
    }
  });
  return out;
}

ReplayResult run_replay_baseline(const env::LidTwistEnv& env, std::span<const TrialResult> recorded, int trials,
                                 std::uint64_t seed, int threads) {
  ReplayResult out;
  if (recorded.empty()) throw std::invalid_argument("run_replay_baseline: no recorded trials");
  std::vector<int> full;
  int best = 0;
  for (int i = 0; i < static_cast<int>(recorded.size()); ++i) {
    if (recorded[i].metrics.end == "timeout") full.push_back(i);
    if (recorded[i].metrics.ad > recorded[best].metrics.ad) best = i;
  }
  Rng rng = Rng::stream(seed, 0x5e1ec7ULL);
  out.source_trial = full.empty() ? best : full[rng.next_u64() % full.size()];
  const auto& actions = recorded[out.source_trial].actions;

  out.trials.resize(std::max(0, trials));
  ThreadPool pool(threads);
  // Fresh resets: a stream disjoint from the recorded trials' streams.
  const std::uint64_t replay_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  pool.parallel_for(out.trials.size(), [&](std::size_t i) {
    const int k = static_cast<int>(i);
    try {
      out.trials[i] = run_open_loop_trial(env, actions, trial_initial_state(env, replay_seed, k), k, replay_seed);
    } catch (const std::exception&) {
      out.trials[i].trial = k;
      out.trials[i].metrics.end = "error";
    }
  });
  return out;
}

std::vector<EpisodeMetrics> metrics_of(std::span<const TrialResult> trials) {
  std::vector<EpisodeMetrics> m;
  for (const auto& t : trials) m.push_back(t.metrics);
  return m;
}

}  // namespace twist::evalkit
