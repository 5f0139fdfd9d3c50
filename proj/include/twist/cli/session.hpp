#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "twist/agent/checkpoint.hpp"
#include "twist/agent/trainer.hpp"
#include "twist/cli/run_config.hpp"
#include "twist/evalkit/ablation.hpp"

namespace twist::cli {

// Hash of the fields that determine a training trajectory (profile, seed,
// env, ppo); stored in checkpoints.
std::string training_hash(const RunConfig& c);

// Agent seed derived from the run seed.
std::uint64_t agent_seed(std::uint64_t run_seed);

// Environments, agent and trainer of one training run.
class TrainingSession {
 public:
  explicit TrainingSession(const RunConfig& cfg, int threads = 0);

  const RunConfig& config() const { return cfg_; }
  agent::PpoAgent& agent() { return agent_; }
  const agent::PpoAgent& agent() const { return agent_; }
  agent::LidVecEnv& env() { return env_; }
  std::int64_t updates() const { return agent_.updates(); }

  void start() { trainer_->start(); }
  agent::IterationStats iterate() { return trainer_->iterate(); }

  // Full resumable state.
  agent::Checkpoint checkpoint() const;
  // Throws std::runtime_error when the checkpoint belongs to another run
  // configuration.
  void restore(const agent::Checkpoint& c);

 private:
  RunConfig cfg_;
  agent::LidVecEnv env_;
  agent::PpoAgent agent_;
  std::unique_ptr<agent::Trainer> trainer_;
};

// Training settings of the ablation suite (method not yet applied).
evalkit::TrainSpec ablation_spec(const RunConfig& c);

// Run configuration embedded in a checkpoint's metadata.
RunConfig run_config_from_checkpoint(const agent::Checkpoint& c);

// Agent with the checkpoint's parameters and normalizers, shaped by `cfg`.
agent::PpoAgent load_policy(const agent::Checkpoint& c, const RunConfig& cfg);

}  // namespace twist::cli
