#include "twist/agent/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "twist/core/types.hpp"

namespace twist::agent {

LidVecEnv::LidVecEnv(env::EnvConfig cfg, int num_envs, std::uint64_t seed, int threads, bool asymmetric)
    : venv_(std::move(cfg), num_envs, seed, threads), asymmetric_(asymmetric) {}

void LidVecEnv::step(const Eigen::MatrixXd& actions, Eigen::VectorXd& rewards, std::vector<std::uint8_t>& dones) {
  venv_.step(actions, scratch_);
  rewards = scratch_.rewards;
  dones = scratch_.dones;
  for (const auto& s : scratch_.finished) {
    finished_.push_back(s);
    if (s.reason == env::DoneReason::kError) errors_.push_back(scratch_.transitions[s.env].error);
  }
}

EpisodeStats LidVecEnv::take_episode_stats() {
  EpisodeStats st;
  for (const auto& s : finished_) {
    ++st.episodes;
    st.mean_return += s.episode_return;
    st.mean_length += s.length;
    st.mean_rotation_deg += std::max(0.0, s.rotation) * 180.0 / kPi;
    if (s.reason == env::DoneReason::kError) ++st.errors;
  }
  if (st.episodes > 0) {
    st.mean_return /= st.episodes;
    st.mean_length /= st.episodes;
    st.mean_rotation_deg /= st.episodes;
  }
  finished_.clear();
  return st;
}

std::vector<std::string> LidVecEnv::take_errors() { return std::exchange(errors_, {}); }

Trainer::Trainer(PpoAgent& agent, VecEnvInterface& env) : agent_(agent), env_(env) {
  if (agent.obs_dim() != env.obs_dim() || agent.critic_dim() != env.critic_dim() ||
      agent.action_dim() != env.action_dim())
    throw std::invalid_argument("Trainer: agent and environment dimensions differ");
  buffer_.allocate(agent.config().horizon, env.num_envs(), env.obs_dim(), env.critic_dim(), env.action_dim());
}

void Trainer::start() { env_.reset(); }

IterationStats Trainer::iterate() {
  const int T = buffer_.horizon, N = buffer_.num_envs;
  buffer_.behaviour_log_std = agent_.actor().effective_log_std();
  double reward_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const Eigen::Index c0 = Eigen::Index(t) * N;
    const PolicyBatch obs = agent_.normalize_obs(env_.obs(), true);
    const CriticBatch cobs = agent_.normalize_critic_obs(env_.critic_obs(), true);
    const ActResult act = agent_.act(obs, false);
    buffer_.obs.middleCols(c0, N) = obs.x;
    buffer_.critic_obs.middleCols(c0, N) = cobs.x;
    buffer_.actions.middleCols(c0, N) = act.actions;
    buffer_.means.middleCols(c0, N) = act.means;
    buffer_.log_probs.segment(c0, N) = act.log_probs;
    buffer_.values.row(t) = agent_.value(cobs);

    env_.step(act.actions.cwiseMax(-1.0).cwiseMin(1.0), rewards_, dones_);
    for (int i = 0; i < N; ++i) {
      buffer_.rewards(t, i) = rewards_[i];
      buffer_.dones(t, i) = dones_[i];
    }
    reward_sum += rewards_.sum();
  }
  env_steps_ += std::int64_t(T) * N;
  buffer_.bootstrap = agent_.value(agent_.normalize_critic_obs(env_.critic_obs(), false));

  IterationStats out;
  out.ppo = agent_.update(buffer_);
  out.update = agent_.updates();
  out.mean_reward = reward_sum / (double(T) * N);
  if (auto* lid = dynamic_cast<LidVecEnv*>(&env_)) out.episodes = lid->take_episode_stats();
  return out;
}

}  // namespace twist::agent
