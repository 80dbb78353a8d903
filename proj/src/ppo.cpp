#include "qodc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qodc/errors.hpp"

namespace qodc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("ppo: gamma must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw InvalidArgument("ppo: clip_epsilon must be positive");
  if (!(value_coef >= 0.0)) throw InvalidArgument("ppo: value_coef must be non-negative");
  if (minibatch_size < 1) throw InvalidArgument("ppo: minibatch_size must be >= 1");
  if (update_epochs < 1) throw InvalidArgument("ppo: update_epochs must be >= 1");
  if (episodes < 1) throw InvalidArgument("ppo: episodes must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("ppo: learning_rate must be positive");
}

std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                double gamma) {
  if (rewards.empty()) throw InvalidArgument("gae: empty buffer");
  if (values.size() != rewards.size()) throw InvalidArgument("gae: need one value per round");
  const std::size_t n = rewards.size();
  std::vector<double> adv(n);
  double reward_sum = 0.0;           // sum_{y=z}^{Z-1} gamma^(y-z) R_y
  double bootstrap = values[n - 1];  // gamma^(Z-z) V_Z
  for (std::size_t z = n; z-- > 0;) {
    if (z + 1 < n) {
      reward_sum = rewards[z] + gamma * reward_sum;
      bootstrap *= gamma;
    }
    adv[z] = bootstrap - values[z] + reward_sum;
  }
  return adv;
}

std::vector<double> value_targets(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw InvalidArgument("value targets: empty buffer");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t z = rewards.size(); z-- > 0;) {
    acc = rewards[z] + gamma * acc;
    out[z] = acc;
  }
  return out;
}

void EpisodeBuffer::clear() {
  transitions.clear();
  advantages.clear();
  targets.clear();
}

void EpisodeBuffer::finalize(double gamma) {
  std::vector<double> rewards(transitions.size());
  std::vector<double> values(transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    rewards[i] = transitions[i].reward;
    values[i] = transitions[i].value_estimate;
  }
  advantages = compute_gae(rewards, values, gamma);
  targets = value_targets(rewards, gamma);
}

Minibatch Minibatch::gather(const EpisodeBuffer& buffer, std::span<const std::size_t> indices) {
  if (buffer.advantages.size() != buffer.size() || buffer.targets.size() != buffer.size()) {
    throw InvalidArgument("minibatch: buffer has not been finalized");
  }
  Minibatch b;
  const auto B = static_cast<long>(indices.size());
  const auto& first = buffer.transitions.at(indices.front());
  b.features.resize(static_cast<long>(first.features.size()), B);
  b.raw_actions.resize(first.raw_action.size(), B);
  b.log_prob_old.resize(B);
  b.advantages.resize(B);
  b.targets.resize(B);
  for (long c = 0; c < B; ++c) {
    const auto idx = indices[static_cast<std::size_t>(c)];
    const auto& t = buffer.transitions.at(idx);
    b.features.col(c) = Eigen::Map<const VectorXd>(t.features.data(), b.features.rows());
    b.raw_actions.col(c) = t.raw_action;
    b.log_prob_old[c] = t.log_prob_old;
    b.advantages[c] = buffer.advantages[idx];
    b.targets[c] = buffer.targets[idx];
  }
  return b;
}

void normalize_advantages(VectorXd& advantages) {
  if (advantages.size() == 0) return;
  const double mean = advantages.mean();
  advantages.array() -= mean;
  const double sd = std::sqrt(advantages.squaredNorm() / static_cast<double>(advantages.size()));
  if (sd > 0.0) advantages /= sd + 1e-12;
}

namespace {

VectorXd log_probs(const Minibatch& batch, const ActorCritic& net, const MatrixXd& mean) {
  const VectorXd log_std = net.log_std();
  VectorXd lp(batch.raw_actions.cols());
  for (long i = 0; i < lp.size(); ++i) {
    lp[i] = squashed_log_prob(mean.col(i), log_std, batch.raw_actions.col(i));
  }
  return lp;
}

}  // namespace

VectorXd policy_ratios(const Minibatch& batch, const ActorCritic& net) {
  const MatrixXd mean = net.actor().forward(net.actor_params(), batch.features);
  return (log_probs(batch, net, mean) - batch.log_prob_old).array().exp().matrix();
}

double surrogate_loss(const Minibatch& batch, const ActorCritic& net, double epsilon) {
  const VectorXd ratio = policy_ratios(batch, net);
  double sum = 0.0;
  for (long i = 0; i < ratio.size(); ++i) {
    const double a = batch.advantages[i];
    sum += std::min(ratio[i] * a, clip_function(ratio[i], epsilon) * a);
  }
  return sum / static_cast<double>(ratio.size());
}

double value_loss(const Minibatch& batch, const ActorCritic& net) {
  const auto v = net.critic().forward(net.critic_params(), batch.features);
  return (v.row(0).transpose() - batch.targets).squaredNorm() /
         static_cast<double>(batch.targets.size());
}

PpoLoss ppo_loss(const Minibatch& batch, const ActorCritic& net, double epsilon,
                 double value_coef) {
  const auto fwd = forward_batch(net, batch.features);
  const auto B = static_cast<long>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(B);
  const VectorXd log_std = net.log_std();
  const VectorXd inv_var = (-2.0 * log_std).array().exp();

  LossGradient up;
  up.d_mean = MatrixXd::Zero(fwd.mean.rows(), B);
  up.d_log_std = VectorXd::Zero(log_std.size());
  up.d_value.resize(B);

  PpoLoss out;
  for (long i = 0; i < B; ++i) {
    const auto u = batch.raw_actions.col(i);
    const auto mu = fwd.mean.col(i);
    const double lp = squashed_log_prob(mu, log_std, u);
    const double ratio = std::exp(lp - batch.log_prob_old[i]);
    const double a = batch.advantages[i];
    const double unclipped = ratio * a;
    const double clipped = clip_function(ratio, epsilon) * a;
    out.surrogate += std::min(unclipped, clipped);
    // The clipped branch is constant in the ratio whenever it is the minimum.
    if (unclipped <= clipped) {
      const double d_lp = -inv_b * a * ratio;
      const VectorXd diff = u - mu;
      up.d_mean.col(i) = d_lp * diff.cwiseProduct(inv_var);
      up.d_log_std.array() += d_lp * (diff.array().square() * inv_var.array() - 1.0);
    }
    const double residual = fwd.value[i] - batch.targets[i];
    out.value_loss += residual * residual;
    up.d_value[i] = value_coef * 2.0 * residual * inv_b;
  }
  out.surrogate *= inv_b;
  out.value_loss *= inv_b;
  out.objective = out.surrogate - value_coef * out.value_loss;
  out.gradient = backward(net, fwd, up);
  return out;
}

TrainResult train(const EnvConfig& env_config, const PpoConfig& ppo, const PolicySpec& spec,
                  std::uint64_t seed, const std::function<void(const EpisodeLog&)>& on_episode) {
  ppo.validate();
  EnvConfig cfg = env_config;
  cfg.seed = seed;
  cfg.validate();
  if (spec.feature_dim != cfg.feature_dim() || spec.action_dim != cfg.action_dim()) {
    throw InvalidArgument("policy dims do not match the environment");
  }

  TrainResult result{ActorCritic(spec, seed), AdamState(spec.param_count()), {}, 0};
  auto& net = result.policy;
  Environment env(cfg);
  Rng act_rng = make_rng(seed, 1);
  Rng batch_rng = make_rng(seed, 2);
  EpisodeBuffer buffer;
  const auto N = static_cast<std::size_t>(ppo.minibatch_size);

  for (int e = 1; e <= ppo.episodes; ++e) {
    buffer.clear();
    const NetworkState* state = &env.reset();
    EpisodeLog log;
    log.episode = e;
    double surrogate_sum = 0.0, value_sum = 0.0;
    int feasible = 0;

    for (int z = 1; z <= cfg.horizon; ++z) {
      const auto features = state_features(*state, cfg);
      const auto act = forward_actor(net, features, act_rng);
      const double value = forward_critic(net, features);
      const auto outcome = env.step({act.action.data(), static_cast<std::size_t>(act.action.size())});
      buffer.transitions.push_back({features, act.pre_squash, act.log_prob, outcome.reward, value, z});
      log.mean_reward += outcome.reward;
      feasible += outcome.feasible ? 1 : 0;
      state = &env.state();

      if (static_cast<std::size_t>(z) % N == 0) {
        buffer.finalize(ppo.gamma);
        std::vector<std::size_t> order(buffer.size());
        for (int x = 0; x < ppo.update_epochs; ++x) {
          std::iota(order.begin(), order.end(), std::size_t{0});
          std::shuffle(order.begin(), order.end(), batch_rng);
          const std::span<const std::size_t> picked(order.data(), std::min(N, order.size()));
          auto batch = Minibatch::gather(buffer, picked);
          if (ppo.normalize_advantages) normalize_advantages(batch.advantages);
          const auto loss = ppo_loss(batch, net, ppo.clip_epsilon, ppo.value_coef);
          adam_step(net.params(), loss.gradient, result.adam, ppo.learning_rate);
          net.project();
          if (!net.finite()) {
            throw DivergenceError("training diverged at episode " + std::to_string(e) +
                                  ", round " + std::to_string(z));
          }
          surrogate_sum += loss.surrogate;
          value_sum += loss.value_loss;
          ++log.updates;
        }
        buffer.clear();
      }
    }

    log.mean_reward /= cfg.horizon;
    log.feasibility_rate = static_cast<double>(feasible) / cfg.horizon;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    log.surrogate_loss = log.updates > 0 ? surrogate_sum / log.updates : nan;
    log.value_loss = log.updates > 0 ? value_sum / log.updates : nan;
    log.policy_std_mean = net.log_std().array().exp().mean();
    result.updates += log.updates;
    result.log.push_back(log);
    if (on_episode) on_episode(log);
  }
  return result;
}

double EvaluationReport::mean_reward() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.reward;
  return s / static_cast<double>(rows.size());
}

double EvaluationReport::feasibility_rate() const {
  if (rows.empty()) return 0.0;
  const auto n = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.feasible; });
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

std::optional<double> EvaluationReport::oracle_ratio() const {
  if (rows.empty()) return std::nullopt;
  double oracle = 0.0;
  for (const auto& r : rows) {
    if (!r.oracle_utility) return std::nullopt;
    oracle += *r.oracle_utility;
  }
  return mean_reward() / (oracle / static_cast<double>(rows.size()));
}

std::vector<NetworkState> sample_states(const EnvConfig& config, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed, 3);
  std::vector<NetworkState> states;
  states.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) states.push_back(sample_state(config, rng));
  return states;
}

EvaluationReport evaluate(const ActorCritic& net, const EnvConfig& config,
                          std::span<const NetworkState> states,
                          std::span<const double> oracle_utilities) {
  if (!oracle_utilities.empty() && oracle_utilities.size() != states.size()) {
    throw InvalidArgument("evaluate: need one oracle utility per state");
  }
  EvaluationReport report;
  report.rows.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto action = greedy_action(net, state_features(states[i], config));
    StateEvaluation row;
    row.state = states[i];
    row.contract = decode_action({action.data(), static_cast<std::size_t>(action.size())}, config);
    const auto scored = score_contract(states[i], row.contract, config);
    row.reward = scored.reward;
    row.feasible = scored.feasible;
    if (!oracle_utilities.empty()) row.oracle_utility = oracle_utilities[i];
    report.rows.push_back(std::move(row));
  }
  return report;
}

EvaluationReport evaluate(const ActorCritic& net, const EnvConfig& config, int n_states,
                          std::uint64_t seed) {
  const auto states = sample_states(config, n_states, seed);
  return evaluate(net, config, states);
}

}  // namespace qodc
