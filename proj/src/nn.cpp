#include "qodc/nn.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t MlpSpec::param_count() const {
  std::size_t count = 0;
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    count += in * width + width;
    in = width;
  }
  return count + in * output_dim + output_dim;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.input_dim < 1 || spec_.output_dim < 1) throw InvalidArgument("mlp: dims must be >= 1");
  std::size_t in = spec_.input_dim;
  std::size_t offset = 0;
  auto add = [&](std::size_t out) {
    if (out < 1) throw InvalidArgument("mlp: layer widths must be >= 1");
    layers_.push_back({in, out, offset});
    offset += in * out + out;
    in = out;
  };
  for (std::size_t width : spec_.hidden) add(width);
  add(spec_.output_dim);
  param_count_ = offset;
  if (param_count_ != spec_.param_count()) throw Error("mlp: parameter layout mismatch");
}

MatrixXd Mlp::forward(std::span<const double> params, const MatrixXd& input, Cache* cache) const {
  if (static_cast<std::size_t>(input.rows()) != spec_.input_dim) {
    throw InvalidArgument("mlp: expected " + std::to_string(spec_.input_dim) + " inputs, got " +
                          std::to_string(input.rows()));
  }
  if (params.size() != param_count_) throw InvalidArgument("mlp: parameter count mismatch");
  if (cache) cache->layer_inputs.clear();
  MatrixXd a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    Eigen::Map<const MatrixXd> W(params.data() + L.offset, static_cast<long>(L.out),
                                 static_cast<long>(L.in));
    Eigen::Map<const VectorXd> b(params.data() + L.offset + L.in * L.out, static_cast<long>(L.out));
    MatrixXd z = W * a;
    z.colwise() += b;
    if (cache) cache->layer_inputs.push_back(std::move(a));
    if (l + 1 < layers_.size()) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void Mlp::backward(std::span<const double> params, const Cache& cache, MatrixXd grad_output,
                   std::span<double> grad) const {
  if (grad.size() != param_count_) throw InvalidArgument("mlp: gradient size mismatch");
  MatrixXd delta = std::move(grad_output);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    const MatrixXd& a = cache.layer_inputs[l];
    Eigen::Map<const MatrixXd> W(params.data() + L.offset, static_cast<long>(L.out),
                                 static_cast<long>(L.in));
    Eigen::Map<MatrixXd> gW(grad.data() + L.offset, static_cast<long>(L.out),
                            static_cast<long>(L.in));
    Eigen::Map<VectorXd> gb(grad.data() + L.offset + L.in * L.out, static_cast<long>(L.out));
    gW.noalias() += delta * a.transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      // a = tanh(z_prev), so dtanh = 1 - a^2.
      MatrixXd back = W.transpose() * delta;
      delta = (back.array() * (1.0 - a.array().square())).matrix();
    }
  }
}

void Mlp::initialize(std::span<double> params, Rng& rng, double output_gain) const {
  if (params.size() != param_count_) throw InvalidArgument("mlp: parameter count mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(L.in));
    const double gain = l + 1 == layers_.size() ? output_gain : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < L.in * L.out + L.out; ++i) {
      params[L.offset + i] = gain * dist(rng);
    }
  }
}

std::size_t PolicySpec::param_count() const {
  return actor_spec().param_count() + action_dim + critic_spec().param_count();
}

ActorCritic::ActorCritic(PolicySpec spec, std::uint64_t init_seed)
    : spec_(std::move(spec)), actor_(spec_.actor_spec()), critic_(spec_.critic_spec()) {
  params_ = VectorXd::Zero(static_cast<long>(spec_.param_count()));
  Rng rng = make_rng(init_seed, 0x6e6e);
  actor_.initialize({params_.data(), actor_.param_count()}, rng, 0.01);
  params_.segment(static_cast<long>(log_std_offset()), static_cast<long>(spec_.action_dim))
      .setConstant(spec_.log_std_init);
  critic_.initialize({params_.data() + critic_offset(), critic_.param_count()}, rng, 1.0);
  project();
}

ActorCritic::ActorCritic(PolicySpec spec, VectorXd params)
    : spec_(std::move(spec)),
      actor_(spec_.actor_spec()),
      critic_(spec_.critic_spec()),
      params_(std::move(params)) {
  if (static_cast<std::size_t>(params_.size()) != spec_.param_count()) {
    throw InvalidArgument("actor-critic: expected " + std::to_string(spec_.param_count()) +
                          " parameters, got " + std::to_string(params_.size()));
  }
}

std::span<const double> ActorCritic::actor_params() const {
  return {params_.data(), actor_.param_count()};
}

std::span<const double> ActorCritic::critic_params() const {
  return {params_.data() + critic_offset(), critic_.param_count()};
}

Eigen::Map<const VectorXd> ActorCritic::log_std() const {
  return {params_.data() + log_std_offset(), static_cast<long>(spec_.action_dim)};
}

void ActorCritic::project() {
  auto s = params_.segment(static_cast<long>(log_std_offset()), static_cast<long>(spec_.action_dim));
  s = s.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

namespace {

// log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
  const double x = -2.0 * u;
  const double softplus = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return 2.0 * (std::numbers::ln2 - u - softplus);
}

MatrixXd column(std::span<const double> features) {
  return Eigen::Map<const VectorXd>(features.data(), static_cast<long>(features.size()));
}

}  // namespace

double squashed_log_prob(const Eigen::Ref<const VectorXd>& mean,
                         const Eigen::Ref<const VectorXd>& log_std,
                         const Eigen::Ref<const VectorXd>& pre_squash) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (long i = 0; i < mean.size(); ++i) {
    const double z = (pre_squash[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - half_log_2pi;
    lp -= log_one_minus_tanh_sq(pre_squash[i]);
  }
  return lp;
}

GaussianAction forward_actor(const ActorCritic& net, std::span<const double> features, Rng& rng) {
  GaussianAction out;
  out.mean = net.actor().forward(net.actor_params(), column(features)).col(0);
  out.log_std = net.log_std();
  out.pre_squash.resize(out.mean.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (long i = 0; i < out.mean.size(); ++i) {
    out.pre_squash[i] = out.mean[i] + std::exp(out.log_std[i]) * normal(rng);
  }
  out.action = out.pre_squash.array().tanh().matrix();
  out.log_prob = squashed_log_prob(out.mean, out.log_std, out.pre_squash);
  return out;
}

VectorXd greedy_action(const ActorCritic& net, std::span<const double> features) {
  return net.actor().forward(net.actor_params(), column(features)).col(0).array().tanh().matrix();
}

double forward_critic(const ActorCritic& net, std::span<const double> features) {
  return net.critic().forward(net.critic_params(), column(features))(0, 0);
}

BatchForward forward_batch(const ActorCritic& net, const MatrixXd& features) {
  BatchForward out;
  out.mean = net.actor().forward(net.actor_params(), features, &out.actor_cache);
  out.value = net.critic().forward(net.critic_params(), features, &out.critic_cache).row(0);
  return out;
}

VectorXd backward(const ActorCritic& net, const BatchForward& fwd, const LossGradient& upstream) {
  VectorXd grad = VectorXd::Zero(net.params().size());
  const auto A = static_cast<long>(net.spec().action_dim);
  net.actor().backward(net.actor_params(), fwd.actor_cache, upstream.d_mean,
                       {grad.data(), net.actor().param_count()});
  grad.segment(static_cast<long>(net.log_std_offset()), A) = upstream.d_log_std;
  net.critic().backward(net.critic_params(), fwd.critic_cache, MatrixXd(upstream.d_value),
                        {grad.data() + net.critic_offset(), net.critic().param_count()});
  return grad;
}

void adam_step(VectorXd& params, const VectorXd& gradient, AdamState& state, double learning_rate,
               const AdamOptions& options) {
  if (gradient.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw InvalidArgument("adam: dimension mismatch");
  }
  state.step += 1;
  state.m = options.beta1 * state.m + (1.0 - options.beta1) * gradient;
  state.v = options.beta2 * state.v + (1.0 - options.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  params.array() -= learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + options.epsilon);
}

}  // namespace qodc
