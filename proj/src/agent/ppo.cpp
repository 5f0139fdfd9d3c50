#include "twist/agent/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twist/agent/gae.hpp"
#include "twist/core/json_fields.hpp"
#include "twist/core/serialize.hpp"

namespace twist::agent {

using nlohmann::json;

void validate(const PpoConfig& c) {
  auto check = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("ppo.") + field + ": " + what);
  };
  check(c.clip > 0.0, "clip", "must be positive");
  check(c.horizon >= 1, "horizon", "must be >= 1");
  check(c.gamma > 0.0 && c.gamma <= 1.0, "gamma", "must lie in (0, 1]");
  check(c.lambda > 0.0 && c.lambda <= 1.0, "lambda", "must lie in (0, 1]");
  check(c.kl_threshold > 0.0, "kl_threshold", "must be positive");
  check(c.grad_norm_max > 0.0, "grad_norm_max", "must be positive");
  check(c.num_envs >= 1, "num_envs", "must be >= 1");
  check(c.minibatch >= 1 && c.minibatch <= c.horizon * c.num_envs, "minibatch", "must lie in [1, horizon * num_envs]");
  check(c.epochs >= 1, "epochs", "must be >= 1");
  check(c.lr_min > 0.0 && c.lr_min <= c.lr_max, "lr_min", "needs 0 < lr_min <= lr_max");
  check(c.learning_rate >= c.lr_min && c.learning_rate <= c.lr_max, "learning_rate", "must lie in [lr_min, lr_max]");
  check(c.entropy_coef >= 0.0, "entropy_coef", "must be >= 0");
  check(c.init_log_std >= kLogStdMin && c.init_log_std <= kLogStdMax, "init_log_std", "must lie in [-5, 2]");
  check(!c.actor_hidden.empty(), "actor_hidden", "needs at least one layer");
  check(!c.critic_hidden.empty(), "critic_hidden", "needs at least one layer");
  for (int h : c.actor_hidden) check(h >= 1, "actor_hidden", "sizes must be positive");
  for (int h : c.critic_hidden) check(h >= 1, "critic_hidden", "sizes must be positive");
}

json to_json(const PpoConfig& c) {
  return {{"clip", c.clip},
          {"horizon", c.horizon},
          {"gamma", c.gamma},
          {"lambda", c.lambda},
          {"kl_threshold", c.kl_threshold},
          {"adaptive_lr", c.adaptive_lr},
          {"grad_norm_max", c.grad_norm_max},
          {"minibatch", c.minibatch},
          {"num_envs", c.num_envs},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"lr_min", c.lr_min},
          {"lr_max", c.lr_max},
          {"entropy_coef", c.entropy_coef},
          {"init_log_std", c.init_log_std},
          {"actor_hidden", c.actor_hidden},
          {"critic_hidden", c.critic_hidden},
          {"asymmetric", c.asymmetric}};
}

void merge_json(PpoConfig& c, const json& j, const std::string& path) {
  JsonFields f(j, path);
  f.get("clip", c.clip);
  f.get("horizon", c.horizon);
  f.get("gamma", c.gamma);
  f.get("lambda", c.lambda);
  f.get("kl_threshold", c.kl_threshold);
  f.get("adaptive_lr", c.adaptive_lr);
  f.get("grad_norm_max", c.grad_norm_max);
  f.get("minibatch", c.minibatch);
  f.get("num_envs", c.num_envs);
  f.get("epochs", c.epochs);
  f.get("learning_rate", c.learning_rate);
  f.get("lr_min", c.lr_min);
  f.get("lr_max", c.lr_max);
  f.get("entropy_coef", c.entropy_coef);
  f.get("init_log_std", c.init_log_std);
  f.get("actor_hidden", c.actor_hidden);
  f.get("critic_hidden", c.critic_hidden);
  f.get("asymmetric", c.asymmetric);
  f.finish();
}

double adapt_learning_rate(double lr, double kl, const PpoConfig& cfg) {
  if (kl > 2.0 * cfg.kl_threshold)
    lr *= 0.5;
  else if (kl < 0.5 * cfg.kl_threshold)
    lr *= 1.5;
  return std::clamp(lr, cfg.lr_min, cfg.lr_max);
}

void RolloutBuffer::allocate(int T, int N, int obs_dim, int critic_dim, int action_dim) {
  horizon = T;
  num_envs = N;
  const Eigen::Index B = Eigen::Index(T) * N;
  obs.resize(obs_dim, B);
  critic_obs.resize(critic_dim, B);
  actions.resize(action_dim, B);
  means.resize(action_dim, B);
  log_probs.resize(B);
  values.resize(T, N);
  rewards.resize(T, N);
  dones.resize(T, N);
  bootstrap.resize(N);
}

PpoAgent::PpoAgent(int obs_dim, int critic_dim, int action_dim, PpoConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      actor_(obs_dim, cfg_.actor_hidden, action_dim, cfg_.init_log_std),
      critic_(critic_dim, cfg_.critic_hidden, 1),
      obs_norm_(obs_dim),
      critic_norm_(critic_dim),
      value_norm_(1),
      lr_(cfg_.learning_rate),
      rng_(seed) {
  validate(cfg_);
  actor_.net.init(rng_, 0.01);
  critic_.init(rng_, 1.0);
}

PolicyBatch PpoAgent::normalize_obs(const Eigen::MatrixXd& raw, bool update_stats) {
  if (update_stats) obs_norm_.update(raw);
  return {obs_norm_.apply(raw)};
}

CriticBatch PpoAgent::normalize_critic_obs(const Eigen::MatrixXd& raw, bool update_stats) {
  if (update_stats) critic_norm_.update(raw);
  return {critic_norm_.apply(raw)};
}

ActResult PpoAgent::act(const PolicyBatch& obs, bool deterministic) {
  ActResult r;
  r.means = actor_.mean(obs.x);
  r.actions = deterministic ? r.means : actor_.sample(r.means, rng_);
  r.log_probs = gaussian_log_prob(r.means, actor_.effective_log_std(), r.actions);
  return r;
}

Eigen::MatrixXd PpoAgent::mean_action(const Eigen::MatrixXd& raw_obs) const {
  return actor_.mean(obs_norm_.apply(raw_obs));
}

Eigen::RowVectorXd PpoAgent::value(const CriticBatch& obs) const {
  return value_norm_.unapply(critic_.forward(obs.x));
}

namespace {

// Scales `g` to norm at most `max_norm`; returns the norm before scaling.
double clip_norm(std::vector<Eigen::VectorXd*> parts, double max_norm) {
  double sq = 0.0;
  for (auto* p : parts) sq += p->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm)
    for (auto* p : parts) *p *= max_norm / norm;
  return norm;
}

void shuffle(std::vector<Eigen::Index>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx, std::size_t lo, std::size_t hi) {
  Eigen::MatrixXd out(m.rows(), Eigen::Index(hi - lo));
  for (std::size_t k = lo; k < hi; ++k) out.col(Eigen::Index(k - lo)) = m.col(idx[k]);
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx, std::size_t lo, std::size_t hi) {
  Eigen::VectorXd out(Eigen::Index(hi - lo));
  for (std::size_t k = lo; k < hi; ++k) out[Eigen::Index(k - lo)] = v[idx[k]];
  return out;
}

}  // namespace

UpdateStats PpoAgent::update(RolloutBuffer& buf) {
  const int T = buf.horizon, N = buf.num_envs;
  const Eigen::Index B = Eigen::Index(T) * N;

  Eigen::MatrixXd values(T + 1, N);
  values.topRows(T) = buf.values;
  values.row(T) = buf.bootstrap;
  const GaeResult gae = compute_gae(buf.rewards, values, buf.dones, cfg_.gamma, cfg_.lambda);

  // Flatten in sample order t * N + env.
  Eigen::VectorXd adv(B), ret(B);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) {
      adv[Eigen::Index(t) * N + i] = gae.advantages(t, i);
      ret[Eigen::Index(t) * N + i] = gae.returns(t, i);
    }
  if (!adv.allFinite() || !ret.allFinite()) throw NonFiniteLoss("ppo_update: non-finite advantages");

  const PpoAgent backup = *this;
  value_norm_.update(ret.transpose());
  const Eigen::RowVectorXd target = value_norm_.apply(ret.transpose());
  const double adv_mean = adv.mean();
  const double adv_std = std::sqrt((adv.array() - adv_mean).square().mean());
  adv = (adv.array() - adv_mean) / (adv_std + 1e-8);

  std::vector<Eigen::Index> idx(B);
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  const std::size_t mb = static_cast<std::size_t>(cfg_.minibatch);
  const std::size_t num_mb = std::max<std::size_t>(1, static_cast<std::size_t>(B) / mb);

  UpdateStats stats;
  int count = 0;
  Mlp::Cache actor_cache, critic_cache;
  Eigen::VectorXd g_actor, g_critic, g_log_std;
  try {
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      shuffle(idx, rng_);
      for (std::size_t m = 0; m < num_mb; ++m) {
        const std::size_t lo = m * static_cast<std::size_t>(B) / num_mb;
        const std::size_t hi = (m + 1) * static_cast<std::size_t>(B) / num_mb;
        const double M = static_cast<double>(hi - lo);
        const Eigen::MatrixXd obs = gather(buf.obs, idx, lo, hi);
        const Eigen::MatrixXd cobs = gather(buf.critic_obs, idx, lo, hi);
        const Eigen::MatrixXd act = gather(buf.actions, idx, lo, hi);
        const Eigen::MatrixXd old_mean = gather(buf.means, idx, lo, hi);
        const Eigen::VectorXd old_logp = gather(buf.log_probs, idx, lo, hi);
        const Eigen::VectorXd a = gather(adv, idx, lo, hi);
        Eigen::RowVectorXd tgt(Eigen::Index(hi - lo));
        for (std::size_t k = lo; k < hi; ++k) tgt[Eigen::Index(k - lo)] = target[idx[k]];

        // Actor.
        const Eigen::MatrixXd mean = actor_.net.forward(obs, actor_cache);
        const Eigen::VectorXd log_std = actor_.effective_log_std();
        const Eigen::VectorXd logp = gaussian_log_prob(mean, log_std, act);
        const Eigen::ArrayXd ratio = (logp - old_logp).array().exp();
        const Eigen::ArrayXd clipped = ratio.cwiseMax(1.0 - cfg_.clip).cwiseMin(1.0 + cfg_.clip);
        const Eigen::ArrayXd s1 = ratio * a.array(), s2 = clipped * a.array();
        const double actor_loss = -s1.min(s2).mean() - cfg_.entropy_coef * actor_.entropy();
        // dL/dlogp per sample; zero where the clipped branch is selected.
        const Eigen::ArrayXd dlogp = (s1 <= s2).select(-a.array() * ratio / M, 0.0);
        const Eigen::ArrayXd inv_var = (-2.0 * log_std).array().exp();
        const Eigen::ArrayXXd diff = (act - mean).array();
        Eigen::MatrixXd up = ((diff.colwise() * inv_var).rowwise() * dlogp.transpose()).matrix();
        g_actor.setZero(actor_.net.params().size());
        actor_.net.backward(actor_cache, up, g_actor);
        g_log_std = ((diff.square().colwise() * inv_var - 1.0).rowwise() * dlogp.transpose()).rowwise().sum().matrix();
        g_log_std.array() -= cfg_.entropy_coef;
        for (Eigen::Index k = 0; k < g_log_std.size(); ++k)
          if (actor_.log_std[k] < kLogStdMin || actor_.log_std[k] > kLogStdMax) g_log_std[k] = 0.0;

        // Critic.
        const Eigen::MatrixXd v = critic_.forward(cobs, critic_cache);
        const Eigen::RowVectorXd err = v.row(0) - tgt;
        const double critic_loss = err.squaredNorm() / M;
        g_critic.setZero(critic_.params().size());
        critic_.backward(critic_cache, 2.0 * err / M, g_critic);

        const double kl = gaussian_kl(old_mean, buf.behaviour_log_std, mean, log_std).mean();
        if (!std::isfinite(actor_loss) || !std::isfinite(critic_loss) || !std::isfinite(kl) || !g_actor.allFinite() ||
            !g_critic.allFinite() || !g_log_std.allFinite())
          throw NonFiniteLoss("ppo_update: non-finite loss or gradient at epoch " + std::to_string(epoch));

        stats.actor_grad_norm += clip_norm({&g_actor, &g_log_std}, cfg_.grad_norm_max);
        stats.critic_grad_norm += clip_norm({&g_critic}, cfg_.grad_norm_max);
        adam_step(actor_.net.params(), g_actor, actor_opt_, lr_);
        adam_step(actor_.log_std, g_log_std, log_std_opt_, lr_);
        adam_step(critic_.params(), g_critic, critic_opt_, lr_);
        actor_.log_std = actor_.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
        if (cfg_.adaptive_lr) lr_ = adapt_learning_rate(lr_, kl, cfg_);

        stats.kl += kl;
        stats.clip_frac += ((ratio - 1.0).abs() > cfg_.clip).cast<double>().mean();
        stats.actor_loss += actor_loss;
        stats.critic_loss += critic_loss;
        ++count;
      }
    }
  } catch (const NonFiniteLoss&) {
    *this = backup;
    throw;
  }
  stats.kl /= count;
  stats.clip_frac /= count;
  stats.actor_loss /= count;
  stats.critic_loss /= count;
  stats.actor_grad_norm /= count;
  stats.critic_grad_norm /= count;
  stats.entropy = actor_.entropy();
  stats.learning_rate = lr_;
  ++updates_;
  return stats;
}

std::uint64_t PpoAgent::state_hash() const { return fnv1a64(to_bytes(*this)); }

}  // namespace twist::agent
