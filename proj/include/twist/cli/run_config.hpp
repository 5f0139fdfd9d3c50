#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "twist/agent/ppo.hpp"
#include "twist/env/config.hpp"

namespace twist::cli {

enum class Profile { kPaper, kSmall };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct TrainSettings {
  int updates = 2000;
  int checkpoint_every = 100;
  int threads = 0;  // 0: all hardware threads
};

struct EvalSettings {
  int trials = 20;
  int replay_trials = 20;
};

struct AblationSettings {
  std::vector<std::string> methods{"full", "reduced_contact", "no_vision"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int updates = 2000;
  int eval_every = 100;
  int eval_trials = 16;
};

// Everything a command needs; serialized into every artifact.
struct RunConfig {
  Profile profile = Profile::kSmall;
  std::uint64_t seed = 0;
  env::EnvConfig env;
  agent::PpoConfig ppo;
  TrainSettings train;
  EvalSettings eval;
  AblationSettings ablation;
};

// Hyperparameters of a profile: "paper" uses the published PPO settings,
// "small" a desk-scale network and batch.
RunConfig profile_defaults(Profile p);

void validate(const RunConfig& c);
nlohmann::json to_json(const RunConfig& c);
// Strict merge; unknown keys raise ConfigError naming the key path.
void merge_json(RunConfig& c, const nlohmann::json& j);

// Profile defaults (flag, else the file's "profile", else small), then the
// config file, then explicit flags.
RunConfig load_run_config(const std::optional<std::string>& path, const std::optional<std::string>& profile,
                          const std::optional<std::uint64_t>& seed);

std::string run_config_hash(const RunConfig& c);

}  // namespace twist::cli
