#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "twist/agent/adam.hpp"
#include "twist/agent/gaussian_policy.hpp"
#include "twist/agent/normalizer.hpp"

namespace twist::agent {

struct PpoConfig {
  double clip = 0.2;
  int horizon = 16;
  double gamma = 0.99;
  double lambda = 0.95;
  double kl_threshold = 0.016;
  bool adaptive_lr = true;
  double grad_norm_max = 1.0;
  int minibatch = 8192;
  int num_envs = 512;
  int epochs = 5;
  double learning_rate = 5e-4;
  double lr_min = 1e-6;
  double lr_max = 1e-2;
  double entropy_coef = 0.0;
  double init_log_std = 0.0;
  std::vector<int> actor_hidden{256, 256, 128};
  std::vector<int> critic_hidden{512, 512, 512};
  bool asymmetric = true;  // critic sees the privileged observation
};

// Throws std::invalid_argument naming the field.
void validate(const PpoConfig& cfg);
nlohmann::json to_json(const PpoConfig& cfg);
void merge_json(PpoConfig& cfg, const nlohmann::json& j, const std::string& path = "ppo");

// Adaptive learning-rate rule: halve above 2x the threshold, grow by 1.5
// below half of it, always inside [lr_min, lr_max].
double adapt_learning_rate(double lr, double kl, const PpoConfig& cfg);

// Distinct input types: the actor only ever accepts PolicyBatch.
struct PolicyBatch {
  Eigen::MatrixXd x;
};
struct CriticBatch {
  Eigen::MatrixXd x;
};

// One rollout of `horizon` steps over `num_envs` envs; sample index is
// t * num_envs + env.
struct RolloutBuffer {
  int horizon = 0, num_envs = 0;
  Eigen::MatrixXd obs;        // normalized policy obs, obs_dim x T*N
  Eigen::MatrixXd critic_obs; // normalized critic obs
  Eigen::MatrixXd actions;    // raw samples (pre-clip)
  Eigen::MatrixXd means;      // behaviour policy means
  Eigen::VectorXd log_probs;
  Eigen::MatrixXd values;     // T x N, denormalized
  Eigen::MatrixXd rewards;    // T x N
  Eigen::MatrixXd dones;      // T x N
  Eigen::RowVectorXd bootstrap;  // values of the final observations
  Eigen::VectorXd behaviour_log_std;

  void allocate(int horizon, int num_envs, int obs_dim, int critic_dim, int action_dim);
};

struct UpdateStats {
  double kl = 0.0;
  double clip_frac = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double learning_rate = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActResult {
  Eigen::MatrixXd actions;  // samples, or means when deterministic
  Eigen::MatrixXd means;
  Eigen::VectorXd log_probs;
};

class PpoAgent {
 public:
  PpoAgent() = default;
  PpoAgent(int obs_dim, int critic_dim, int action_dim, PpoConfig cfg, std::uint64_t seed);

  const PpoConfig& config() const { return cfg_; }
  int obs_dim() const { return actor_.net.input_dim(); }
  int critic_dim() const { return critic_.input_dim(); }
  int action_dim() const { return actor_.action_dim(); }

  // Normalizes with the running statistics; `update_stats` folds the batch
  // in first.
  PolicyBatch normalize_obs(const Eigen::MatrixXd& raw, bool update_stats);
  CriticBatch normalize_critic_obs(const Eigen::MatrixXd& raw, bool update_stats);

  ActResult act(const PolicyBatch& obs, bool deterministic);
  // Deterministic action (policy mean) for raw observations, statistics frozen.
  Eigen::MatrixXd mean_action(const Eigen::MatrixXd& raw_obs) const;
  // Denormalized state values, one per column.
  Eigen::RowVectorXd value(const CriticBatch& obs) const;

  // Throws NonFiniteLoss (parameters left untouched) on a non-finite loss or
  // gradient.
  UpdateStats update(RolloutBuffer& buffer);

  GaussianPolicy& actor() { return actor_; }
  const GaussianPolicy& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  const RunningNormalizer& obs_normalizer() const { return obs_norm_; }
  const RunningNormalizer& critic_normalizer() const { return critic_norm_; }
  const RunningNormalizer& value_normalizer() const { return value_norm_; }
  double learning_rate() const { return lr_; }
  std::int64_t updates() const { return updates_; }
  Rng& rng() { return rng_; }

  // Hash over every parameter and statistic, for quick equality checks.
  std::uint64_t state_hash() const;

  template <class Ar, class S>
    requires std::same_as<std::remove_const_t<S>, PpoAgent>
  friend void visit(Ar& ar, S& s) {
    ar.io(s.actor_.net.params());
    ar.io(s.actor_.log_std);
    ar.io(s.critic_.params());
    ar.io(s.obs_norm_);
    ar.io(s.critic_norm_);
    ar.io(s.value_norm_);
    ar.io(s.actor_opt_);
    ar.io(s.log_std_opt_);
    ar.io(s.critic_opt_);
    ar.io(s.lr_);
    ar.io(s.updates_);
    ar.io(s.rng_);
  }

 private:
  PpoConfig cfg_;
  GaussianPolicy actor_;
  Mlp critic_;
  RunningNormalizer obs_norm_, critic_norm_, value_norm_;
  AdamState actor_opt_, log_std_opt_, critic_opt_;
  double lr_ = 0.0;
  std::int64_t updates_ = 0;
  Rng rng_;
};

}  // namespace twist::agent
