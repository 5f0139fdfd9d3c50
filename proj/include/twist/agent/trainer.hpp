#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "twist/agent/ppo.hpp"
#include "twist/env/vector_env.hpp"

namespace twist::agent {

// Batched environment seen by the trainer.
class VecEnvInterface {
 public:
  virtual ~VecEnvInterface() = default;
  virtual int num_envs() const = 0;
  virtual int obs_dim() const = 0;
  virtual int critic_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual void reset() = 0;
  virtual const Eigen::MatrixXd& obs() const = 0;
  virtual const Eigen::MatrixXd& critic_obs() const = 0;
  // actions: action_dim x N. Fills one reward and done flag per env.
  virtual void step(const Eigen::MatrixXd& actions, Eigen::VectorXd& rewards, std::vector<std::uint8_t>& dones) = 0;
  virtual std::string save() const = 0;
  virtual void load(const std::string& bytes) = 0;
};

struct EpisodeStats {
  int episodes = 0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  double mean_rotation_deg = 0.0;  // floored at 0 per episode
  int errors = 0;
};

// VecEnvInterface over the lid-twisting VectorEnv; also tallies finished
// episodes.
class LidVecEnv : public VecEnvInterface {
 public:
  LidVecEnv(env::EnvConfig cfg, int num_envs, std::uint64_t seed, int threads = 0, bool asymmetric = true);

  int num_envs() const override { return venv_.size(); }
  int obs_dim() const override { return env::kPolicyObsDim; }
  int critic_dim() const override { return static_cast<int>(critic_obs().rows()); }
  int action_dim() const override { return kNumJoints; }
  void reset() override { venv_.reset(); }
  const Eigen::MatrixXd& obs() const override { return venv_.obs(); }
  const Eigen::MatrixXd& critic_obs() const override { return asymmetric_ ? venv_.priv_obs() : venv_.obs(); }
  void step(const Eigen::MatrixXd& actions, Eigen::VectorXd& rewards, std::vector<std::uint8_t>& dones) override;
  std::string save() const override { return venv_.save(); }
  void load(const std::string& bytes) override { venv_.load(bytes); }

  env::VectorEnv& vector_env() { return venv_; }
  // Episodes finished since the last call.
  EpisodeStats take_episode_stats();
  std::vector<std::string> take_errors();

 private:
  env::VectorEnv venv_;
  bool asymmetric_;
  env::VectorStep scratch_;
  std::vector<env::EpisodeSummary> finished_;
  std::vector<std::string> errors_;
};

struct IterationStats {
  std::int64_t update = 0;  // 1-based index of the completed update
  double mean_reward = 0.0;
  UpdateStats ppo;
  EpisodeStats episodes;
};

// Rollout collection plus PPO update.
class Trainer {
 public:
  Trainer(PpoAgent& agent, VecEnvInterface& env);

  // Resets the environments; call once before the first iteration of a
  // fresh run (not after restoring a checkpoint).
  void start();
  IterationStats iterate();

  std::int64_t env_steps() const { return env_steps_; }
  void set_env_steps(std::int64_t n) { env_steps_ = n; }
  const RolloutBuffer& buffer() const { return buffer_; }

 private:
  PpoAgent& agent_;
  VecEnvInterface& env_;
  RolloutBuffer buffer_;
  std::int64_t env_steps_ = 0;
  Eigen::VectorXd rewards_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace twist::agent
