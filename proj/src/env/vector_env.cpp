#include "twist/env/vector_env.hpp"

#include <stdexcept>

#include "twist/core/serialize.hpp"

namespace twist::env {

VectorEnv::VectorEnv(EnvConfig config, int num_envs, std::uint64_t seed, int threads)
    : env_(std::move(config)), seed_(seed) {
  if (num_envs < 1) throw std::invalid_argument("VectorEnv: num_envs must be >= 1");
  slots_.resize(num_envs);
  obs_.setZero(kPolicyObsDim, num_envs);
  priv_obs_.setZero(privileged_obs_dim(env_.config().keypoints_per_link), num_envs);
  pool_ = std::make_unique<ThreadPool>(threads);
}

void VectorEnv::set_threads(int threads) { pool_ = std::make_unique<ThreadPool>(threads); }

void VectorEnv::reset_slot(int i, Rng rng) {
  Slot& slot = slots_[i];
  slot.state = env_.reset_episode(std::move(rng));
  slot.episode_return = 0.0;
  PolicyObservation o;
  PrivilegedObservation p;
  env_.build_observation(slot.state, o, p);
  obs_.col(i) = o.values;
  priv_obs_.col(i) = p.values;
}

void VectorEnv::reset() {
  std::vector<std::string> errors(slots_.size());
  pool_->parallel_for(slots_.size(), [&](std::size_t i) {
    try {
      reset_slot(static_cast<int>(i), Rng::stream(seed_, i));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw std::runtime_error("env " + std::to_string(i) + ": " + errors[i]);
}

void VectorEnv::step(const Eigen::MatrixXd& actions, VectorStep& out) {
  const int n = size();
  if (actions.rows() != kNumJoints || actions.cols() != n)
    throw std::invalid_argument("VectorEnv::step: actions must be 32 x num_envs");
  out.transitions.resize(n);
  out.rewards.resize(n);
  out.dones.assign(n, 0);
  std::vector<std::string> reset_errors(n);
  std::vector<EpisodeSummary> summaries(n);

  pool_->parallel_for(n, [&](std::size_t k) {
    const int i = static_cast<int>(k);
    Slot& slot = slots_[i];
    Transition& tr = out.transitions[i];
    try {
      env_.step(slot.state, actions.col(i), tr);
    } catch (const std::exception& e) {
      tr = Transition{};
      tr.done = true;
      tr.done_reason = DoneReason::kError;
      tr.error = e.what();
      tr.step = slot.state.step;
      tr.lid_angle = slot.state.bottle.lid_angle;
    }
    slot.episode_return += tr.reward_total;
    if (!tr.done) {
      obs_.col(i) = tr.obs.values;
      priv_obs_.col(i) = tr.priv_obs.values;
      return;
    }
    summaries[i] = {i, slot.episode_return, tr.step, tr.done_reason, tr.lid_angle - slot.state.start_angle};
    try {
      reset_slot(i, slot.state.rng);
    } catch (const std::exception& e) {
      reset_errors[i] = e.what();
    }
  });

  out.finished.clear();
  for (int i = 0; i < n; ++i) {
    if (!reset_errors[i].empty()) throw std::runtime_error("env " + std::to_string(i) + ": " + reset_errors[i]);
    const Transition& tr = out.transitions[i];
    out.rewards[i] = tr.reward_total;
    out.dones[i] = tr.done ? 1 : 0;
    if (tr.done) out.finished.push_back(summaries[i]);
  }
  out.obs = obs_;
  out.priv_obs = priv_obs_;
}

std::string VectorEnv::save() const {
  ByteWriter w;
  w.io(seed_);
  w.io(static_cast<std::int64_t>(slots_.size()));
  for (const auto& s : slots_) {
    w.io(s.state);
    w.io(s.episode_return);
  }
  w.io(obs_);
  w.io(priv_obs_);
  return w.take();
}

void VectorEnv::load(const std::string& bytes) {
  ByteReader r(bytes);
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  r.io(seed);
  r.io(n);
  if (n != size()) throw std::runtime_error("VectorEnv::load: env count mismatch");
  std::vector<Slot> slots(n);
  for (auto& s : slots) {
    r.io(s.state);
    r.io(s.episode_return);
  }
  Eigen::MatrixXd obs, priv;
  r.io(obs);
  r.io(priv);
  if (!r.done()) throw std::runtime_error("VectorEnv::load: trailing bytes");
  if (obs.rows() != obs_.rows() || priv.rows() != priv_obs_.rows() || obs.cols() != n)
    throw std::runtime_error("VectorEnv::load: observation shape mismatch");
  seed_ = seed;
  slots_ = std::move(slots);
  obs_ = std::move(obs);
  priv_obs_ = std::move(priv);
}

}  // namespace twist::env
