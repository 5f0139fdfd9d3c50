#include "twist/cli/session.hpp"

#include <stdexcept>

#include "twist/core/serialize.hpp"

namespace twist::cli {

using nlohmann::json;

std::string training_hash(const RunConfig& c) {
  const json j = {{"profile", to_string(c.profile)},
                  {"seed", c.seed},
                  {"env", env::to_json(c.env)},
                  {"ppo", agent::to_json(c.ppo)}};
  return hash_hex(fnv1a64(j.dump()));
}

std::uint64_t agent_seed(std::uint64_t run_seed) { return run_seed ^ 0xa6e47ULL; }

TrainingSession::TrainingSession(const RunConfig& cfg, int threads)
    : cfg_(cfg),
      env_(cfg.env, cfg.ppo.num_envs, cfg.seed, threads, cfg.ppo.asymmetric),
      agent_(env_.obs_dim(), env_.critic_dim(), env_.action_dim(), cfg.ppo, agent_seed(cfg.seed)) {
  trainer_ = std::make_unique<agent::Trainer>(agent_, env_);
}

agent::Checkpoint TrainingSession::checkpoint() const {
  agent::Checkpoint c;
  c.config_hash = training_hash(cfg_);
  c.meta["run_config"] = to_json(cfg_);
  c.meta["env"] = env::to_json(cfg_.env);
  c.meta["ppo"] = agent::to_json(cfg_.ppo);
  c.meta["seed"] = cfg_.seed;
  c.meta["update"] = agent_.updates();
  c.meta["env_steps"] = trainer_->env_steps();
  agent::store_agent(c, agent_);
  c.entries["env"] = env_.save();
  return c;
}

void TrainingSession::restore(const agent::Checkpoint& c) {
  if (c.config_hash != training_hash(cfg_))
    throw std::runtime_error("checkpoint was written by a different run configuration (hash " + c.config_hash +
                             ", expected " + training_hash(cfg_) + ")");
  if (!c.entries.count("env")) throw std::runtime_error("checkpoint has no environment state");
  agent::restore_agent(c, agent_);
  env_.load(c.entries.at("env"));
  trainer_->set_env_steps(c.meta.value("env_steps", std::int64_t{0}));
}

evalkit::TrainSpec ablation_spec(const RunConfig& c) {
  evalkit::TrainSpec spec;
  spec.env = c.env;
  spec.ppo = c.ppo;
  spec.updates = c.ablation.updates;
  spec.eval_every = c.ablation.eval_every;
  spec.eval_trials = c.ablation.eval_trials;
  spec.threads = c.train.threads;
  return spec;
}

RunConfig run_config_from_checkpoint(const agent::Checkpoint& c) {
  if (c.meta.contains("run_config")) {
    const json& j = c.meta["run_config"];
    RunConfig cfg = profile_defaults(profile_from_string(j.value("profile", std::string("small"))));
    merge_json(cfg, j);
    return cfg;
  }
  if (!c.meta.contains("env") || !c.meta.contains("ppo"))
    throw std::runtime_error("checkpoint carries no configuration");
  RunConfig cfg;
  env::merge_json(cfg.env, c.meta["env"]);
  agent::merge_json(cfg.ppo, c.meta["ppo"]);
  cfg.seed = c.meta.value("seed", std::uint64_t{0});
  return cfg;
}

agent::PpoAgent load_policy(const agent::Checkpoint& c, const RunConfig& cfg) {
  const int critic_dim =
      cfg.ppo.asymmetric ? env::privileged_obs_dim(cfg.env.keypoints_per_link) : env::kPolicyObsDim;
  agent::PpoAgent a(env::kPolicyObsDim, critic_dim, kNumJoints, cfg.ppo, 0);
  agent::restore_agent(c, a);
  return a;
}

}  // namespace twist::cli
