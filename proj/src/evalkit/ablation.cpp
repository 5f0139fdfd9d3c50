#include "twist/evalkit/ablation.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "twist/agent/checkpoint.hpp"
#include "twist/agent/trainer.hpp"
#include "twist/core/serialize.hpp"
#include "twist/evalkit/evaluation.hpp"

namespace twist::evalkit {

using nlohmann::json;

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"full", "reduced_contact", "no_vision", "gait", "no_asym", "large"};
  return m;
}

void apply_method(const std::string& method, TrainSpec& spec) {
  if (method == "full") return;
  if (method == "reduced_contact") {
    spec.env.rewards.contact *= 0.1;
  } else if (method == "no_vision") {
    spec.env.vision = false;
  } else if (method == "gait") {
    spec.env.contact_reward = env::ContactReward::kGait;
  } else if (method == "no_asym") {
    spec.ppo.asymmetric = false;
  } else if (method == "large") {
    for (int& h : spec.ppo.actor_hidden) h *= 4;
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
}

std::string spec_hash(const TrainSpec& s) {
  json j = {{"env", env::to_json(s.env)}, {"ppo", agent::to_json(s.ppo)}, {"updates", s.updates},
            {"eval_every", s.eval_every}, {"eval_trials", s.eval_trials}};
  return hash_hex(fnv1a64(j.dump()));
}

TrainRun train_and_track(const TrainSpec& base, const std::string& method, std::uint64_t seed,
                         const ProgressFn& progress) {
  TrainSpec spec = base;
  apply_method(method, spec);
  TrainRun run;
  run.method = method;
  run.seed = seed;
  run.config_hash = spec_hash(spec);

  agent::LidVecEnv venv(spec.env, spec.ppo.num_envs, seed, spec.threads, spec.ppo.asymmetric);
  agent::PpoAgent agent(venv.obs_dim(), venv.critic_dim(), venv.action_dim(), spec.ppo, seed ^ 0xa6e47ULL);
  agent::Trainer trainer(agent, venv);
  // Curve evaluations share one trial set per seed across methods.
  const std::uint64_t eval_seed = seed + 1000003ULL;
  auto evaluate = [&](std::int64_t update) {
    const auto trials = evaluate_policy(venv.vector_env().env(), agent, spec.eval_trials, eval_seed, spec.threads);
    const auto m = metrics_of(trials);
    const Summary s = summarize(m);
    run.curve.push_back({update, s.ad_mean});
    if (progress) progress(method, seed, update, s.ad_mean);
    return s;
  };
  try {
    trainer.start();
    evaluate(0);
    for (int u = 1; u <= spec.updates; ++u) {
      trainer.iterate();
      if (u % spec.eval_every == 0 && u != spec.updates) evaluate(u);
    }
    run.final_eval = evaluate(spec.updates);
    if (!spec.checkpoint_dir.empty()) {
      agent::Checkpoint c;
      c.config_hash = run.config_hash;
      c.meta["env"] = env::to_json(spec.env);
      c.meta["ppo"] = agent::to_json(spec.ppo);
      c.meta["seed"] = seed;
      c.meta["method"] = method;
      c.meta["update"] = agent.updates();
      agent::store_agent(c, agent);
      std::filesystem::create_directories(spec.checkpoint_dir);
      agent::write_checkpoint(
          (std::filesystem::path(spec.checkpoint_dir) / (method + "_seed" + std::to_string(seed) + ".ckpt")).string(),
          c);
    }
  } catch (const std::exception& e) {
    run.failed = true;
    run.error = e.what();
  }
  return run;
}

const MethodReport& ExperimentReport::at(const std::string& method) const {
  for (const auto& m : methods)
    if (m.method == method) return m;
  throw std::out_of_range("report has no method '" + method + "'");
}

ExperimentReport aggregate_runs(const std::vector<TrainRun>& runs) {
  ExperimentReport rep;
  for (const auto& r : runs) {
    MethodReport* m = nullptr;
    for (auto& x : rep.methods)
      if (x.method == r.method) m = &x;
    if (!m) {
      rep.methods.push_back({});
      m = &rep.methods.back();
      m->method = r.method;
      m->config_hash = r.config_hash;
    }
    m->seeds.push_back(r.seed);
    m->runs.push_back(r);
  }
  for (auto& m : rep.methods) {
    std::map<std::int64_t, std::vector<double>> by_update;
    std::vector<double> finals;
    for (const auto& r : m.runs) {
      for (const auto& p : r.curve) by_update[p.update].push_back(p.ad);
      if (r.failed)
        ++m.failures;
      else
        finals.push_back(r.final_eval.ad_mean);
    }
    for (const auto& [u, v] : by_update) m.curve.push_back({double(u), mean(v), stddev(v)});
    m.final_ad_mean = mean(finals);
    m.final_ad_std = stddev(finals);
  }
  return rep;
}

ExperimentReport run_ablation_suite(const TrainSpec& base, const std::vector<std::string>& methods,
                                    const std::vector<std::uint64_t>& seeds, const ProgressFn& progress) {
  std::vector<TrainRun> runs;
  for (const auto& m : methods)
    for (auto s : seeds) runs.push_back(train_and_track(base, m, s, progress));
  return aggregate_runs(runs);
}

json to_json(const TrainRun& r) {
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back({p.update, p.ad});
  return {{"method", r.method}, {"seed", r.seed},           {"config_hash", r.config_hash},
          {"curve", curve},     {"final", to_json(r.final_eval)}, {"failed", r.failed},
          {"error", r.error}};
}

TrainRun train_run_from_json(const json& j) {
  TrainRun r;
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& p : j.at("curve")) r.curve.push_back({p.at(0).get<std::int64_t>(), p.at(1).get<double>()});
  const json& f = j.at("final");
  r.final_eval = {f.at("n").get<int>(),        f.at("ad_mean").get<double>(),  f.at("ad_std").get<double>(),
                  f.at("ttf_mean").get<double>(), f.at("ttf_std").get<double>(), f.at("vel_mean").get<double>(),
                  f.at("vel_std").get<double>()};
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

json to_json(const ExperimentReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    json runs = json::array();
    for (const auto& x : m.runs) runs.push_back(to_json(x));
    json curve = json::array();
    for (const auto& c : m.curve) curve.push_back({c[0], c[1], c[2]});
    methods.push_back({{"method", m.method},
                       {"config_hash", m.config_hash},
                       {"seeds", m.seeds},
                       {"n", m.runs.size() - m.failures},
                       {"failures", m.failures},
                       {"final_ad_mean", m.final_ad_mean},
                       {"final_ad_std", m.final_ad_std},
                       {"curve", curve},
                       {"runs", runs}});
  }
  return {{"methods", methods}};
}

void write_report(const std::string& dir, const ExperimentReport& r) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "curves");
  std::ofstream(fs::path(dir) / "report.json") << to_json(r).dump(2) << '\n';
  std::ofstream summary(fs::path(dir) / "summary.csv");
  summary << "method,config_hash,n,failures,final_ad_mean,final_ad_std\n";
  for (const auto& m : r.methods) {
    summary << m.method << ',' << m.config_hash << ',' << m.runs.size() - m.failures << ',' << m.failures << ','
            << m.final_ad_mean << ',' << m.final_ad_std << '\n';
    std::ofstream curve(fs::path(dir) / "curves" / (m.method + ".csv"));
    curve << "update,ad_mean,ad_std\n";
    for (const auto& c : m.curve) curve << static_cast<std::int64_t>(c[0]) << ',' << c[1] << ',' << c[2] << '\n';
  }
}

}  // namespace twist::evalkit
