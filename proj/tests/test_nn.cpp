#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qodc/nn.hpp"
#include "qodc/rng.hpp"

using namespace qodc;

namespace {

double naive_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                      const Eigen::VectorXd& u) {
  double lp = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double s = std::exp(log_std(i));
    const double z = (u(i) - mean(i)) / s;
    lp += -0.5 * z * z - std::log(s) - 0.5 * std::log(2 * std::numbers::pi);
    lp -= std::log(1.0 - std::tanh(u(i)) * std::tanh(u(i)));
  }
  return lp;
}

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(MlpSpec{6, {64, 64}, 4}.param_count() == 6 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4);
  const PolicySpec spec;
  CHECK(spec.param_count() ==
        spec.actor_spec().param_count() + spec.action_dim + spec.critic_spec().param_count());
  ActorCritic net(spec, 1);
  CHECK(static_cast<std::size_t>(net.params().size()) == spec.param_count());
  for (int i = 0; i < 4; ++i) CHECK(net.log_std()(i) == -0.5);
}

TEST_CASE("MLP forward against a hand evaluation") {
  const Mlp mlp(MlpSpec{2, {2}, 1});
  // W1 = [[1, 2], [3, 4]] column-major, b1 = (0.1, -0.1), W2 = [0.5, -1], b2 = 0.25.
  const std::vector<double> p{1, 3, 2, 4, 0.1, -0.1, 0.5, -1, 0.25};
  Eigen::MatrixXd x(2, 1);
  x << 0.3, -0.2;
  const double h1 = std::tanh(1 * 0.3 + 2 * -0.2 + 0.1);
  const double h2 = std::tanh(3 * 0.3 + 4 * -0.2 - 0.1);
  CHECK(mlp.forward(p, x)(0, 0) == doctest::Approx(0.5 * h1 - h2 + 0.25).epsilon(1e-15));
}

TEST_CASE("MLP backward matches finite differences") {
  const Mlp mlp(MlpSpec{3, {5, 4}, 2});
  std::vector<double> p(mlp.param_count());
  Rng rng = make_rng(3, 0);
  mlp.initialize(p, rng, 1.0);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(3, 7, [&] { return n01(rng); });
  Eigen::MatrixXd w = Eigen::MatrixXd::NullaryExpr(2, 7, [&] { return n01(rng); });
  auto loss = [&](const std::vector<double>& q) { return (mlp.forward(q, x).array() * w.array()).sum(); };

  Mlp::Cache cache;
  mlp.forward(p, x, &cache);
  std::vector<double> grad(p.size(), 0.0);
  mlp.backward(p, cache, w, grad);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto plus = p, minus = p;
    plus[i] += 1e-6;
    minus[i] -= 1e-6;
    const double fd = (loss(plus) - loss(minus)) / 2e-6;
    REQUIRE(std::abs(fd - grad[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("squashed log-probability") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd m = Eigen::VectorXd::NullaryExpr(4, [&] { return n01(rng); });
    Eigen::VectorXd ls = Eigen::VectorXd::NullaryExpr(4, [&] { return 0.5 * n01(rng); });
    Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(4, [&] { return 2 * n01(rng); });
    const double naive = naive_log_prob(m, ls, u);
    REQUIRE(std::abs(squashed_log_prob(m, ls, u) - naive) <= 1e-9 * std::max(1.0, std::abs(naive)));
  }
  // Far in the tail the naive form overflows; the stable one stays finite.
  Eigen::VectorXd u(1), m(1), ls(1);
  u << 30.0;
  m << 0.0;
  ls << 0.0;
  CHECK(std::isfinite(squashed_log_prob(m, ls, u)));
}

TEST_CASE("sampled actions are squashed and their log-prob is consistent") {
  ActorCritic net(PolicySpec{}, 7);
  Rng rng = make_rng(7, 1);
  const std::vector<double> feat{0.9, 0.46, 0.84, 0.16, 0.13, 0.8};
  for (int i = 0; i < 50; ++i) {
    const auto a = forward_actor(net, feat, rng);
    CHECK(a.action.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(a.log_prob == doctest::Approx(squashed_log_prob(a.mean, a.log_std, a.pre_squash)));
    CHECK((a.action - a.pre_squash.array().tanh().matrix()).norm() == 0.0);
  }
  const auto g = greedy_action(net, feat);
  CHECK(g.cwiseAbs().maxCoeff() < 0.1);  // small output gain keeps the initial mean near 0
}

TEST_CASE("log-std projection") {
  ActorCritic net(PolicySpec{}, 1);
  net.params()(static_cast<long>(net.log_std_offset())) = 4.0;
  net.params()(static_cast<long>(net.log_std_offset()) + 1) = -9.0;
  net.project();
  CHECK(net.log_std()(0) == kLogStdMax);
  CHECK(net.log_std()(1) == kLogStdMin);
}

TEST_CASE("initialization is deterministic per seed") {
  CHECK(ActorCritic(PolicySpec{}, 5).params() == ActorCritic(PolicySpec{}, 5).params());
  CHECK_FALSE(ActorCritic(PolicySpec{}, 5).params() == ActorCritic(PolicySpec{}, 6).params());
}

TEST_CASE("Adam: first step moves by the learning rate against the gradient sign") {
  Eigen::VectorXd p(3), g(3);
  p << 1, 2, 3;
  g << 0.5, -2, 0;
  AdamState st(3);
  adam_step(p, g, st, 0.1);
  CHECK(st.step == 1);
  CHECK(p(0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p(1) == doctest::Approx(2.1).epsilon(1e-7));
  CHECK(p(2) == 3.0);
}

TEST_CASE("Adam against a scalar reference recursion") {
  Eigen::VectorXd p(1), g(1);
  p << 0.0;
  AdamState st(1);
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 20; ++t) {
    const double grad = std::sin(t) + 0.3 * x;
    g << grad;
    adam_step(p, g, st, 0.01);
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    REQUIRE(p(0) == doctest::Approx(x).epsilon(1e-12));
  }
}
