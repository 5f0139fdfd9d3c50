#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twist/cli/run_config.hpp"

namespace twist::cli {

struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  std::string out = "runs/default";
};

struct TrainOptions {
  CommonOptions common;
  std::optional<int> updates;
  std::optional<std::string> resume;  // checkpoint to continue from
  std::optional<int> threads;
};

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::optional<int> trials;
  std::optional<std::string> objects;  // single | multi
  bool replay_baseline = false;
  bool write_logs = true;
  std::optional<int> threads;
};

struct ReplayOptions {
  std::string log;
  std::optional<std::string> out;
};

struct BenchOptions {
  CommonOptions common;
  int num_envs = 512;
  int steps = 10;  // vector steps per timing sample
  int repeats = 5;
  std::optional<int> threads;
  std::optional<std::string> baseline;  // earlier bench.json to compare against
};

struct AblateOptions {
  CommonOptions common;
  std::optional<std::vector<std::string>> methods;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<int> updates;
  std::optional<int> threads;
};

// Each returns the process exit code. Failures print a one-line JSON error
// record {"error": kind, "message": ...} to `err`.
int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_replay(const ReplayOptions& o, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateOptions& o, std::ostream& out, std::ostream& err);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNonFinite = 4;
inline constexpr int kExitMismatch = 5;
inline constexpr int kExitDiverged = 6;
inline constexpr int kExitRegression = 7;
inline constexpr int kExitInternal = 1;

}  // namespace twist::cli
