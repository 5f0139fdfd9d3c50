#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twist/agent/checkpoint.hpp"
#include "twist/cli/commands.hpp"
#include "twist/cli/run_config.hpp"
#include "twist/cli/session.hpp"
#include "twist/core/json_fields.hpp"

using namespace twist;
using namespace twist::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& s) const { return (path_ / s).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json tiny_config() {
  return {{"profile", "small"},
          {"seed", 5},
          {"env", {{"horizon", 20}}},
          {"ppo",
           {{"num_envs", 4},
            {"horizon", 4},
            {"minibatch", 8},
            {"epochs", 2},
            {"actor_hidden", {8}},
            {"critic_hidden", {8}}}},
          {"train", {{"updates", 3}, {"checkpoint_every", 1}, {"threads", 1}}},
          {"eval", {{"trials", 2}, {"replay_trials", 2}}}};
}

json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] == '{') last = line;
  return json::parse(last);
}

}  // namespace

TEST(RunConfig, ProfilesValidate) {
  for (auto p : {Profile::kPaper, Profile::kSmall}) EXPECT_NO_THROW(validate(profile_defaults(p)));
  const RunConfig paper = profile_defaults(Profile::kPaper);
  EXPECT_EQ(paper.ppo.minibatch, 8192);
  EXPECT_EQ(paper.ppo.actor_hidden, (std::vector<int>{256, 256, 128}));
  EXPECT_EQ(paper.ppo.critic_hidden, (std::vector<int>{512, 512, 512}));
  EXPECT_EQ(profile_from_string(to_string(Profile::kSmall)), Profile::kSmall);
  EXPECT_THROW(profile_from_string("huge"), ConfigError);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig a = profile_defaults(Profile::kPaper);
  a.seed = 9;
  a.env.horizon = 123;
  RunConfig b = profile_defaults(Profile::kPaper);
  merge_json(b, to_json(a));
  EXPECT_EQ(to_json(b), to_json(a));
  EXPECT_EQ(run_config_hash(a), run_config_hash(b));
  b.seed = 10;
  EXPECT_NE(run_config_hash(a), run_config_hash(b));
}

TEST(RunConfig, UnknownKeyNamesPath) {
  RunConfig c;
  try {
    merge_json(c, json{{"ppo", {{"horizn", 3}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ppo.horizn"), std::string::npos);
  }
  EXPECT_THROW(merge_json(c, json{{"evaluation", 1}}), ConfigError);
}

TEST(RunConfig, Precedence) {
  TempDir dir("twist_cfg_test");
  write_file(dir / "c.json", json{{"profile", "paper"}, {"seed", 3}, {"ppo", {{"epochs", 2}}}}.dump());
  const RunConfig from_file = load_run_config(dir / "c.json", std::nullopt, std::nullopt);
  EXPECT_EQ(from_file.profile, Profile::kPaper);
  EXPECT_EQ(from_file.seed, 3u);
  EXPECT_EQ(from_file.ppo.epochs, 2);
  EXPECT_EQ(from_file.ppo.minibatch, 8192);
  const RunConfig flags = load_run_config(dir / "c.json", std::string("small"), 8);
  EXPECT_EQ(flags.profile, Profile::kSmall);
  EXPECT_EQ(flags.seed, 8u);
  EXPECT_EQ(flags.ppo.epochs, 2);
  EXPECT_EQ(flags.ppo.minibatch, profile_defaults(Profile::kSmall).ppo.minibatch);
  write_file(dir / "bad.json", "{\"ppo\": ");
  EXPECT_THROW(load_run_config(dir / "bad.json", std::nullopt, std::nullopt), ConfigError);
  write_file(dir / "invalid.json", json{{"ppo", {{"gamma", 2.0}}}}.dump());
  EXPECT_THROW(load_run_config(dir / "invalid.json", std::nullopt, std::nullopt), std::invalid_argument);
}

TEST(Session, CheckpointResumeIsBitIdentical) {
  RunConfig cfg = profile_defaults(Profile::kSmall);
  merge_json(cfg, tiny_config());
  TrainingSession straight(cfg, 1);
  straight.start();
  for (int u = 0; u < 4; ++u) straight.iterate();

  TrainingSession first(cfg, 1);
  first.start();
  for (int u = 0; u < 2; ++u) first.iterate();
  const agent::Checkpoint c = agent::decode_checkpoint(agent::encode_checkpoint(first.checkpoint()));
  TrainingSession resumed(cfg, 1);
  resumed.restore(c);
  for (int u = 0; u < 2; ++u) resumed.iterate();
  EXPECT_EQ(resumed.agent().state_hash(), straight.agent().state_hash());
  EXPECT_EQ(resumed.env().save(), straight.env().save());

  RunConfig other = cfg;
  other.seed = 6;
  TrainingSession wrong(other, 1);
  EXPECT_THROW(wrong.restore(c), std::runtime_error);
}

TEST(Commands, TrainEvalReplayPipeline) {
  TempDir dir("twist_cli_pipeline");
  write_file(dir / "tiny.json", tiny_config().dump());
  std::ostringstream out, err;

  TrainOptions t;
  t.common.config = dir / "tiny.json";
  t.common.out = dir / "run";
  ASSERT_EQ(cmd_train(t, out, err), kExitOk) << err.str();
  const json trained = last_json_line(out.str());
  EXPECT_EQ(trained.at("updates").get<int>(), 3);
  EXPECT_TRUE(fs::exists(dir / "run/final.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run/checkpoints/update_000002.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run/config.json"));
  // Header plus one row per update.
  const std::string curve = read_file(dir / "run/curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 4);

  // Resuming from update 1 reproduces the uninterrupted run.
  TrainOptions r = t;
  r.common.out = dir / "resumed";
  r.resume = dir / "run/checkpoints/update_000001.ckpt";
  out.str("");
  ASSERT_EQ(cmd_train(r, out, err), kExitOk) << err.str();
  EXPECT_EQ(last_json_line(out.str()).at("params_hash"), trained.at("params_hash"));

  EvalOptions e;
  e.common.out = dir / "eval";
  e.checkpoint = dir / "run/final.ckpt";
  e.replay_baseline = true;
  out.str("");
  ASSERT_EQ(cmd_eval(e, out, err), kExitOk) << err.str();
  const json summary = json::parse(read_file(dir / "eval/summary.json"));
  EXPECT_EQ(summary.at("policy").at("n").get<int>(), 2);
  EXPECT_TRUE(summary.contains("replay"));
  EXPECT_TRUE(fs::exists(dir / "eval/trials.csv"));
  const std::string log = dir / "eval/logs/trial_000.ndjson";
  ASSERT_TRUE(fs::exists(log));

  ReplayOptions rp;
  rp.log = log;
  rp.out = dir / "replay";
  out.str("");
  EXPECT_EQ(cmd_replay(rp, out, err), kExitOk) << err.str();
  const json rep = json::parse(read_file(dir / "replay/replay.json"));
  EXPECT_EQ(rep.at("max_divergence").get<double>(), 0.0);

  // A tampered step is detected as divergence.
  std::istringstream lines(read_file(log));
  std::string line, text;
  bool edited = false;
  while (std::getline(lines, line)) {
    json j = json::parse(line);
    if (!edited && j.at("type") == "step") {
      j["reward"] = j["reward"].get<double>() + 1.0;
      edited = true;
    }
    text += j.dump() + "\n";
  }
  ASSERT_TRUE(edited);
  write_file(dir / "tampered.ndjson", text);
  rp.log = dir / "tampered.ndjson";
  EXPECT_EQ(cmd_replay(rp, out, err), kExitDiverged);
}

TEST(Commands, ExitCodes) {
  TempDir dir("twist_cli_errors");
  std::ostringstream out, err;
  TrainOptions t;
  t.common.config = dir / "missing.json";
  t.common.out = dir / "run";
  EXPECT_EQ(cmd_train(t, out, err), kExitConfig);
  const json rec = last_json_line(err.str());
  EXPECT_EQ(rec.at("exit_code").get<int>(), kExitConfig);

  write_file(dir / "unknown.json", json{{"trian", {{"updates", 1}}}}.dump());
  t.common.config = dir / "unknown.json";
  EXPECT_EQ(cmd_train(t, out, err), kExitConfig);

  EvalOptions e;
  e.checkpoint = dir / "nope.ckpt";
  e.common.out = dir / "eval";
  EXPECT_EQ(cmd_eval(e, out, err), kExitIo);

  write_file(dir / "junk.ckpt", "not a checkpoint");
  e.checkpoint = dir / "junk.ckpt";
  EXPECT_EQ(cmd_eval(e, out, err), kExitIo);

  ReplayOptions rp;
  rp.log = dir / "nope.ndjson";
  EXPECT_EQ(cmd_replay(rp, out, err), kExitIo);
}

TEST(Commands, ResumeWithOtherConfigIsMismatch) {
  TempDir dir("twist_cli_mismatch");
  json cfg = tiny_config();
  cfg["train"]["updates"] = 1;
  write_file(dir / "a.json", cfg.dump());
  cfg["seed"] = 6;
  write_file(dir / "b.json", cfg.dump());
  std::ostringstream out, err;
  TrainOptions t;
  t.common.config = dir / "a.json";
  t.common.out = dir / "a";
  ASSERT_EQ(cmd_train(t, out, err), kExitOk);
  t.common.config = dir / "b.json";
  t.common.out = dir / "b";
  t.resume = dir / "a/final.ckpt";
  EXPECT_EQ(cmd_train(t, out, err), kExitMismatch);
}

TEST(Commands, BenchRegressionGate) {
  TempDir dir("twist_cli_bench");
  write_file(dir / "tiny.json", tiny_config().dump());
  std::ostringstream out, err;
  BenchOptions b;
  b.common.config = dir / "tiny.json";
  b.common.out = dir / "bench";
  b.num_envs = 4;
  b.steps = 2;
  b.repeats = 1;
  ASSERT_EQ(cmd_bench(b, out, err), kExitOk) << err.str();
  json bench = json::parse(read_file(dir / "bench/bench.json"));
  EXPECT_GT(bench.at("env_steps_per_s").get<double>(), 0.0);
  bench["env_steps_per_s"] = 1e12;
  write_file(dir / "fast.json", bench.dump());
  b.baseline = dir / "fast.json";
  EXPECT_EQ(cmd_bench(b, out, err), kExitRegression);
}
