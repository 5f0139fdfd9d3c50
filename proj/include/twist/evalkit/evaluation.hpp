#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "twist/agent/ppo.hpp"
#include "twist/env/trajectory_log.hpp"
#include "twist/evalkit/metrics.hpp"

namespace twist::evalkit {

struct TrialResult {
  int trial = 0;
  EpisodeMetrics metrics;
  std::vector<JointVector> actions;  // commanded actions, in order
  std::vector<TraceSample> trace;
};

// Initial state of trial `trial` for `seed`: the same for every method
// evaluated with that seed.
env::EnvState trial_initial_state(const env::LidTwistEnv& env, std::uint64_t seed, int trial);

// Closed loop with the policy mean. Runs until the episode ends (at most
// the horizon). `log` receives header, steps and summary when given.
TrialResult run_policy_trial(const env::LidTwistEnv& env, const agent::PpoAgent& agent, env::EnvState state,
                             int trial = 0, std::uint64_t seed = 0, std::ostream* log = nullptr);

// Open loop: executes `actions` one per control step and never reads an
// observation; zero actions once the sequence is exhausted, until the
// horizon or a termination.
TrialResult run_open_loop_trial(const env::LidTwistEnv& env, std::span<const JointVector> actions,
                                env::EnvState state, int trial = 0, std::uint64_t seed = 0,
                                std::ostream* log = nullptr);

// n trials, run in parallel over `threads` workers; results in trial order.
std::vector<TrialResult> evaluate_policy(const env::LidTwistEnv& env, const agent::PpoAgent& agent, int trials,
                                         std::uint64_t seed, int threads = 0);

struct ReplayResult {
  int source_trial = -1;  // recorded trial selected for replay
  std::vector<TrialResult> trials;
};

// Picks a recorded trial at random among those that ran to the horizon
// (falls back to the highest AD) and replays its actions under fresh
// randomized resets.
ReplayResult run_replay_baseline(const env::LidTwistEnv& env, std::span<const TrialResult> recorded, int trials,
                                 std::uint64_t seed, int threads = 0);

std::vector<EpisodeMetrics> metrics_of(std::span<const TrialResult> trials);

}  // namespace twist::evalkit
