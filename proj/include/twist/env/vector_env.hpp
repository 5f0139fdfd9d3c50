#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "twist/core/thread_pool.hpp"
#include "twist/env/env.hpp"

namespace twist::env {

struct EpisodeSummary {
  int env = 0;
  double episode_return = 0.0;
  int length = 0;
  DoneReason reason = DoneReason::kNone;
  double rotation = 0.0;  // lid angle at the end minus at the start, rad
};

struct VectorStep {
  Eigen::MatrixXd obs;       // policy observations after auto-reset, one column per env
  Eigen::MatrixXd priv_obs;  // privileged observations after auto-reset
  Eigen::VectorXd rewards;
  std::vector<std::uint8_t> dones;
  std::vector<Transition> transitions;  // as returned by step, terminal observation kept
  std::vector<EpisodeSummary> finished;  // in env order
};

// N independent environments, each with its own random stream
// Rng::stream(seed, i). Done environments are reset before the next step.
// Results do not depend on the number of worker threads.
class VectorEnv {
 public:
  VectorEnv(EnvConfig config, int num_envs, std::uint64_t seed, int threads = 0);

  int size() const { return static_cast<int>(slots_.size()); }
  const LidTwistEnv& env() const { return env_; }
  int threads() const { return pool_->size(); }
  void set_threads(int threads);

  // Fresh episodes for every env from the seed's streams.
  void reset();

  // actions: 32 x N.
  void step(const Eigen::MatrixXd& actions, VectorStep& out);

  const Eigen::MatrixXd& obs() const { return obs_; }
  const Eigen::MatrixXd& priv_obs() const { return priv_obs_; }
  const EnvState& state(int i) const { return slots_[i].state; }

  // Full state (episodes, streams, current observations) for checkpoints.
  std::string save() const;
  void load(const std::string& bytes);

 private:
  struct Slot {
    EnvState state;
    double episode_return = 0.0;
  };

  void reset_slot(int i, Rng rng);

  LidTwistEnv env_;
  std::uint64_t seed_;
  std::vector<Slot> slots_;
  Eigen::MatrixXd obs_, priv_obs_;
  std::unique_ptr<ThreadPool> pool_;
};

}  // namespace twist::env
