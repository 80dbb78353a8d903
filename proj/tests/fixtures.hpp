#pragma once

#include <cmath>
#include <random>

#include "qodc/ppo.hpp"

namespace qodc::testing {

inline PolicySpec small_spec() { return PolicySpec{6, 4, {8, 8}, -0.5}; }

/// Random minibatch whose old log-probs put the ratios on both sides of the
/// clip range. Ratios landing within `margin` of a clip edge are nudged away so
/// finite differences never straddle a kink.
inline Minibatch random_batch(const ActorCritic& net, std::mt19937_64& rng, int size,
                              double epsilon, double margin = 1e-3) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-0.4, 0.4);
  const auto& spec = net.spec();
  Minibatch b;
  b.features = Eigen::MatrixXd::NullaryExpr(spec.feature_dim, size, [&] { return n01(rng); });
  b.raw_actions = Eigen::MatrixXd::NullaryExpr(spec.action_dim, size, [&] { return n01(rng); });
  b.advantages = Eigen::VectorXd::NullaryExpr(size, [&] { return n01(rng); });
  b.targets = Eigen::VectorXd::NullaryExpr(size, [&] { return n01(rng); });
  b.log_prob_old = Eigen::VectorXd::Zero(size);
  const auto fwd = forward_batch(net, b.features);
  for (int i = 0; i < size; ++i) {
    double lp = squashed_log_prob(fwd.mean.col(i), net.log_std(), b.raw_actions.col(i));
    double s = shift(rng);
    for (double edge : {-epsilon, epsilon})
      if (std::abs(s + edge) < 2 * margin) s += 4 * margin;
    // ratio = exp(lp - old) = exp(s) stays away from 1 +- epsilon in log space
    // only approximately; check the actual ratio too.
    double old = lp - s;
    const double ratio = std::exp(lp - old);
    if (std::abs(ratio - (1 - epsilon)) < margin || std::abs(ratio - (1 + epsilon)) < margin)
      old -= 10 * margin;
    b.log_prob_old(i) = old;
  }
  return b;
}

}  // namespace qodc::testing
