#include "twist/cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include "twist/core/json_fields.hpp"
#include "twist/core/serialize.hpp"
#include "twist/evalkit/ablation.hpp"

namespace twist::cli {

using nlohmann::json;

std::string to_string(Profile p) { return p == Profile::kPaper ? "paper" : "small"; }

Profile profile_from_string(const std::string& s) {
  if (s == "paper") return Profile::kPaper;
  if (s == "small") return Profile::kSmall;
  throw ConfigError("profile: expected 'paper' or 'small', got '" + s + "'");
}

RunConfig profile_defaults(Profile p) {
  RunConfig c;
  c.profile = p;
  if (p == Profile::kSmall) {
    c.ppo.num_envs = 64;
    c.ppo.minibatch = 1024;
    c.ppo.actor_hidden = {128, 128, 64};
    c.ppo.critic_hidden = {128, 128, 128};
    // With unit exploration noise the action penalty outweighs the contact
    // reward and short budgets learn to drop the bottle.
    c.ppo.init_log_std = -2.0;
  }
  return c;
}

void validate(const RunConfig& c) {
  env::validate(c.env);
  agent::validate(c.ppo);
  if (c.train.updates < 0) throw ConfigError("train.updates: must be >= 0");
  if (c.train.checkpoint_every < 1) throw ConfigError("train.checkpoint_every: must be >= 1");
  if (c.eval.trials < 0) throw ConfigError("eval.trials: must be >= 0");
  if (c.eval.replay_trials < 0) throw ConfigError("eval.replay_trials: must be >= 0");
  for (const auto& m : c.ablation.methods) {
    bool ok = false;
    for (const auto& k : evalkit::known_methods()) ok = ok || k == m;
    if (!ok) throw ConfigError("ablation.methods: unknown method '" + m + "'");
  }
  if (c.ablation.updates < 1) throw ConfigError("ablation.updates: must be >= 1");
  if (c.ablation.eval_every < 1) throw ConfigError("ablation.eval_every: must be >= 1");
  if (c.ablation.eval_trials < 1) throw ConfigError("ablation.eval_trials: must be >= 1");
}

json to_json(const RunConfig& c) {
  return {{"profile", to_string(c.profile)},
          {"seed", c.seed},
          {"env", env::to_json(c.env)},
          {"ppo", agent::to_json(c.ppo)},
          {"train",
           {{"updates", c.train.updates}, {"checkpoint_every", c.train.checkpoint_every}, {"threads", c.train.threads}}},
          {"eval", {{"trials", c.eval.trials}, {"replay_trials", c.eval.replay_trials}}},
          {"ablation",
           {{"methods", c.ablation.methods},
            {"seeds", c.ablation.seeds},
            {"updates", c.ablation.updates},
            {"eval_every", c.ablation.eval_every},
            {"eval_trials", c.ablation.eval_trials}}}};
}

void merge_json(RunConfig& c, const json& j) {
  JsonFields f(j, "config");
  std::string profile = to_string(c.profile);
  f.get("profile", profile);
  c.profile = profile_from_string(profile);
  f.get("seed", c.seed);
  f.nested("env", [&](const json& v, const std::string& p) { env::merge_json(c.env, v, p); });
  f.nested("ppo", [&](const json& v, const std::string& p) { agent::merge_json(c.ppo, v, p); });
  f.nested("train", [&](const json& v, const std::string& p) {
    JsonFields g(v, p);
    g.get("updates", c.train.updates);
    g.get("checkpoint_every", c.train.checkpoint_every);
    g.get("threads", c.train.threads);
    g.finish();
  });
  f.nested("eval", [&](const json& v, const std::string& p) {
    JsonFields g(v, p);
    g.get("trials", c.eval.trials);
    g.get("replay_trials", c.eval.replay_trials);
    g.finish();
  });
  f.nested("ablation", [&](const json& v, const std::string& p) {
    JsonFields g(v, p);
    g.get("methods", c.ablation.methods);
    g.get("seeds", c.ablation.seeds);
    g.get("updates", c.ablation.updates);
    g.get("eval_every", c.ablation.eval_every);
    g.get("eval_trials", c.ablation.eval_trials);
    g.finish();
  });
  f.finish();
}

RunConfig load_run_config(const std::optional<std::string>& path, const std::optional<std::string>& profile,
                          const std::optional<std::uint64_t>& seed) {
  json file = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    try {
      file = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + *path + "': " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file '" + *path + "': expected a JSON object");
  }
  Profile p = Profile::kSmall;
  if (profile)
    p = profile_from_string(*profile);
  else if (file.contains("profile") && file["profile"].is_string())
    p = profile_from_string(file["profile"].get<std::string>());
  RunConfig c = profile_defaults(p);
  merge_json(c, file);
  c.profile = p;
  if (seed) c.seed = *seed;
  validate(c);
  return c;
}

std::string run_config_hash(const RunConfig& c) { return hash_hex(fnv1a64(to_json(c).dump())); }

}  // namespace twist::cli
