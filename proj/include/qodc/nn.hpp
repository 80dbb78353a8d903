#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "qodc/rng.hpp"

namespace qodc {

/// Feedforward network with tanh hidden layers and a linear output layer.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t output_dim = 1;

  /// Sum over layers of in * out + out.
  std::size_t param_count() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Stateless evaluator over a flat parameter block. Layer l stores its weight
/// matrix (out x in, column-major) followed by its bias.
class Mlp {
 public:
  /// Input to every layer, kept for the backward pass.
  struct Cache {
    std::vector<Eigen::MatrixXd> layer_inputs;
  };

  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t param_count() const { return param_count_; }

  /// `input` is input_dim x batch; returns output_dim x batch.
  Eigen::MatrixXd forward(std::span<const double> params, const Eigen::MatrixXd& input,
                          Cache* cache = nullptr) const;

  /// Adds dL/dparams to `grad` given dL/doutput.
  void backward(std::span<const double> params, const Cache& cache, Eigen::MatrixXd grad_output,
                std::span<double> grad) const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
  /// layer is scaled by `output_gain`.
  void initialize(std::span<double> params, Rng& rng, double output_gain) const;

 private:
  struct Layer {
    std::size_t in, out, offset;
  };
  MlpSpec spec_;
  std::vector<Layer> layers_;
  std::size_t param_count_ = 0;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

struct PolicySpec {
  std::size_t feature_dim = 6;
  std::size_t action_dim = 4;
  std::vector<std::size_t> hidden{64, 64};
  double log_std_init = -0.5;

  MlpSpec actor_spec() const { return {feature_dim, hidden, action_dim}; }
  MlpSpec critic_spec() const { return {feature_dim, hidden, 1}; }
  /// Actor layers, then one log-std per action dimension, then critic layers.
  std::size_t param_count() const;
  bool operator==(const PolicySpec&) const = default;
};

/// Separate actor and critic networks plus a state-independent log-std,
/// packed into one flat parameter vector.
class ActorCritic {
 public:
  ActorCritic(PolicySpec spec, std::uint64_t init_seed);
  ActorCritic(PolicySpec spec, Eigen::VectorXd params);

  const PolicySpec& spec() const { return spec_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  std::span<const double> actor_params() const;
  std::span<const double> critic_params() const;
  Eigen::Map<const Eigen::VectorXd> log_std() const;

  std::size_t log_std_offset() const { return actor_.param_count(); }
  std::size_t critic_offset() const { return actor_.param_count() + spec_.action_dim; }

  /// Clamps log-std into [kLogStdMin, kLogStdMax].
  void project();
  bool finite() const { return params_.allFinite(); }

 private:
  PolicySpec spec_;
  Mlp actor_;
  Mlp critic_;
  Eigen::VectorXd params_;
};

/// One draw from the tanh-squashed diagonal Gaussian policy.
struct GaussianAction {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
  Eigen::VectorXd pre_squash;  // u ~ N(mean, exp(log_std)^2)
  Eigen::VectorXd action;      // tanh(u), in [-1, 1]
  double log_prob = 0.0;       // density of the squashed action
};

/// log N(u; mean, exp(log_std)) - sum_i log(1 - tanh(u_i)^2).
double squashed_log_prob(const Eigen::Ref<const Eigen::VectorXd>& mean,
                         const Eigen::Ref<const Eigen::VectorXd>& log_std,
                         const Eigen::Ref<const Eigen::VectorXd>& pre_squash);

GaussianAction forward_actor(const ActorCritic& net, std::span<const double> features, Rng& rng);

/// tanh(mean): the deterministic action used for evaluation.
Eigen::VectorXd greedy_action(const ActorCritic& net, std::span<const double> features);

double forward_critic(const ActorCritic& net, std::span<const double> features);

/// Batched forward pass over feature columns, keeping what backward needs.
struct BatchForward {
  Eigen::MatrixXd mean;   // action_dim x batch
  Eigen::RowVectorXd value;
  Mlp::Cache actor_cache;
  Mlp::Cache critic_cache;
};

BatchForward forward_batch(const ActorCritic& net, const Eigen::MatrixXd& features);

/// Upstream derivatives of a scalar loss with respect to the network outputs.
struct LossGradient {
  Eigen::MatrixXd d_mean;     // action_dim x batch
  Eigen::VectorXd d_log_std;  // action_dim
  Eigen::RowVectorXd d_value;  // batch
};

/// dL/dparams in the flat layout of ActorCritic::params().
Eigen::VectorXd backward(const ActorCritic& net, const BatchForward& fwd,
                         const LossGradient& upstream);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
  bool operator==(const AdamState& o) const { return step == o.step && m == o.m && v == o.v; }
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment descent step on `params` along -gradient.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               double learning_rate, const AdamOptions& options = {});

}  // namespace qodc
