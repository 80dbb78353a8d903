#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qodc/env.hpp"
#include "qodc/nn.hpp"

namespace qodc {

struct PpoConfig {
  double gamma = 0.95;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  int minibatch_size = 512;
  int update_epochs = 10;
  int episodes = 500;
  double learning_rate = 1e-4;
  bool normalize_advantages = true;

  void validate() const;
  bool operator==(const PpoConfig&) const = default;
};

struct Transition {
  std::vector<double> features;
  Eigen::VectorXd raw_action;  // pre-squash Gaussian sample
  double log_prob_old = 0.0;
  double reward = 0.0;
  double value_estimate = 0.0;
  int round_index = 0;  // 1-based round within the episode
};

/// Advantage for every stored round z of a buffer holding rounds 1..Z:
///   A_z = gamma^(Z-z) V_Z - V_z + sum_{y=z}^{Z-1} gamma^(y-z) R_y.
/// The last round's own reward never enters, so A_Z = 0.
std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values,
                                double gamma);

/// Discounted reward-to-go, sum_{y=z}^{Z} gamma^(y-z) R_y.
std::vector<double> value_targets(std::span<const double> rewards, double gamma);

/// The clip function g(epsilon, ratio): ratio clamped to [1 - eps, 1 + eps].
inline double clip_function(double ratio, double epsilon) {
  if (ratio < 1.0 - epsilon) return 1.0 - epsilon;
  if (ratio > 1.0 + epsilon) return 1.0 + epsilon;
  return ratio;
}

/// On-policy storage between two updates.
struct EpisodeBuffer {
  std::vector<Transition> transitions;
  std::vector<double> advantages;
  std::vector<double> targets;

  std::size_t size() const { return transitions.size(); }
  void clear();
  /// Fills advantages and targets from the stored rewards and values.
  void finalize(double gamma);
};

/// Column-major batch ready for a loss evaluation.
struct Minibatch {
  Eigen::MatrixXd features;    // feature_dim x B
  Eigen::MatrixXd raw_actions;  // action_dim x B
  Eigen::VectorXd log_prob_old;
  Eigen::VectorXd advantages;
  Eigen::VectorXd targets;

  std::size_t size() const { return static_cast<std::size_t>(advantages.size()); }
  static Minibatch gather(const EpisodeBuffer& buffer, std::span<const std::size_t> indices);
};

/// Shifts and scales to zero mean and unit (population) standard deviation.
void normalize_advantages(Eigen::VectorXd& advantages);

/// exp(log pi_new - log pi_old) for every sample.
Eigen::VectorXd policy_ratios(const Minibatch& batch, const ActorCritic& net);

/// Mean of min(r A, g(eps, r) A); larger is better.
double surrogate_loss(const Minibatch& batch, const ActorCritic& net, double epsilon);

/// Mean of (V(s) - V_targ)^2.
double value_loss(const Minibatch& batch, const ActorCritic& net);

struct PpoLoss {
  double surrogate = 0.0;
  double value_loss = 0.0;
  /// surrogate - value_coef * value_loss, the quantity training ascends.
  double objective = 0.0;
  /// Gradient of -objective with respect to every network parameter.
  Eigen::VectorXd gradient;
};

PpoLoss ppo_loss(const Minibatch& batch, const ActorCritic& net, double epsilon,
                 double value_coef);

struct EpisodeLog {
  int episode = 0;
  double mean_reward = 0.0;
  double feasibility_rate = 0.0;
  double surrogate_loss = 0.0;  // mean over this episode's updates, NaN without updates
  double value_loss = 0.0;
  double policy_std_mean = 0.0;
  int updates = 0;
};

struct TrainResult {
  ActorCritic policy;
  AdamState adam;
  std::vector<EpisodeLog> log;
  int updates = 0;
};

/// Runs `episodes` episodes of env.horizon rounds. After every
/// `minibatch_size` stored rounds, performs `update_epochs` minibatch steps on
/// the buffer and clears it. Deterministic in `seed`; throws DivergenceError
/// if any parameter becomes non-finite.
TrainResult train(const EnvConfig& env_config, const PpoConfig& ppo, const PolicySpec& spec,
                  std::uint64_t seed,
                  const std::function<void(const EpisodeLog&)>& on_episode = {});

struct StateEvaluation {
  NetworkState state;
  Contract contract;
  double reward = 0.0;
  bool feasible = false;
  std::optional<double> oracle_utility;
};

struct EvaluationReport {
  std::vector<StateEvaluation> rows;

  double mean_reward() const;
  double feasibility_rate() const;
  /// Mean policy reward over mean oracle utility, when every row has one.
  std::optional<double> oracle_ratio() const;
};

std::vector<NetworkState> sample_states(const EnvConfig& config, int count, std::uint64_t seed);

/// Acts with tanh(mean) on each state.
EvaluationReport evaluate(const ActorCritic& net, const EnvConfig& config,
                          std::span<const NetworkState> states,
                          std::span<const double> oracle_utilities = {});
EvaluationReport evaluate(const ActorCritic& net, const EnvConfig& config, int n_states,
                          std::uint64_t seed);

}  // namespace qodc
