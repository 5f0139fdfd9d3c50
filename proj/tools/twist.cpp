#include <iostream>

#include "CLI11.hpp"
#include "twist/cli/commands.hpp"

using namespace twist::cli;

namespace {

void add_common(CLI::App* app, CommonOptions& c) {
  app->add_option("--config", c.config, "JSON run configuration (comments allowed)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "run seed (overrides the config file)");
  app->add_option("--profile", c.profile, "paper | small")->check(CLI::IsMember({"paper", "small"}));
  app->add_option("--out", c.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bimanual lid-twisting simulator and PPO trainer"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* t = app.add_subcommand("train", "train a policy");
  add_common(t, train.common);
  t->add_option("--updates", train.updates, "PPO updates (overrides the config)");
  t->add_option("--resume", train.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  t->add_option("--threads", train.threads, "worker threads (0 = all cores)");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint over fixed-seed trials");
  add_common(e, eval.common);
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  e->add_option("--trials", eval.trials, "number of 30 s trials");
  e->add_option("--objects", eval.objects, "single | multi")->check(CLI::IsMember({"single", "multi"}));
  e->add_flag("--replay-baseline", eval.replay_baseline, "also run the open-loop replay baseline");
  e->add_flag("!--no-logs", eval.write_logs, "skip per-trial NDJSON logs");
  e->add_option("--threads", eval.threads, "worker threads (0 = all cores)");

  ReplayOptions replay;
  auto* r = app.add_subcommand("replay", "re-simulate a trajectory log and report divergence");
  r->add_option("log", replay.log, "NDJSON trajectory log")->required()->check(CLI::ExistingFile);
  r->add_option("--out", replay.out, "directory for replay.json");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "measure env throughput and PPO update time");
  add_common(b, bench.common);
  b->add_option("--num-envs", bench.num_envs)->capture_default_str();
  b->add_option("--steps", bench.steps, "vector steps per sample")->capture_default_str();
  b->add_option("--repeats", bench.repeats)->capture_default_str();
  b->add_option("--threads", bench.threads, "worker threads (0 = all cores)");
  b->add_option("--baseline", bench.baseline, "earlier bench.json; exit 7 on a >20% regression")
      ->check(CLI::ExistingFile);

  AblateOptions ablate;
  auto* a = app.add_subcommand("ablate", "multi-seed method comparison");
  add_common(a, ablate.common);
  a->add_option("--methods", ablate.methods, "full reduced_contact no_vision gait no_asym large")->delimiter(',');
  a->add_option("--seeds", ablate.seeds)->delimiter(',');
  a->add_option("--updates", ablate.updates);
  a->add_option("--threads", ablate.threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*t) return cmd_train(train, std::cout, std::cerr);
  if (*e) return cmd_eval(eval, std::cout, std::cerr);
  if (*r) return cmd_replay(replay, std::cout, std::cerr);
  if (*b) return cmd_bench(bench, std::cout, std::cerr);
  return cmd_ablate(ablate, std::cout, std::cerr);
}
