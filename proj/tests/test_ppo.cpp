#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "qodc/errors.hpp"
#include "qodc/ppo.hpp"

using namespace qodc;

namespace {

std::vector<double> naive_advantages(const std::vector<double>& r, const std::vector<double>& v,
                                     double gamma) {
  const std::size_t Z = r.size();
  std::vector<double> a(Z);
  for (std::size_t z = 0; z < Z; ++z) {
    double s = 0.0;
    for (std::size_t y = z; y + 1 < Z; ++y) s += std::pow(gamma, double(y - z)) * r[y];
    a[z] = std::pow(gamma, double(Z - 1 - z)) * v[Z - 1] - v[z] + s;
  }
  return a;
}

std::vector<double> naive_targets(const std::vector<double>& r, double gamma) {
  std::vector<double> t(r.size());
  for (std::size_t z = 0; z < r.size(); ++z) {
    double s = 0.0;
    for (std::size_t y = z; y < r.size(); ++y) s += std::pow(gamma, double(y - z)) * r[y];
    t[z] = s;
  }
  return t;
}

}  // namespace

TEST_CASE("advantages: hand values") {
  const std::vector<double> r{3, 0}, v{1, 2};
  const auto a = compute_gae(r, v, 0.95);
  CHECK(a[0] == 0.95 * 2 - 1 + 3);
  CHECK(a[0] == doctest::Approx(3.9).epsilon(1e-15));
  CHECK(a[1] == 0.0);
  const std::vector<double> zeros(5, 0.0);
  for (double x : compute_gae(zeros, zeros, 0.9)) CHECK(x == 0.0);
  CHECK_THROWS_AS(compute_gae(std::vector<double>{}, std::vector<double>{}, 0.9), InvalidArgument);
  CHECK_THROWS_AS(compute_gae(r, std::vector<double>{1}, 0.9), InvalidArgument);
}

TEST_CASE("value targets: hand values") {
  CHECK(value_targets(std::vector<double>{4.5}, 0.95) == std::vector<double>{4.5});
  CHECK(value_targets(std::vector<double>{1, 2, 3}, 1.0) == std::vector<double>{6, 5, 3});
  CHECK(value_targets(std::vector<double>{1, 2, 3}, 0.0) == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(value_targets(std::vector<double>{}, 0.9), InvalidArgument);
}

TEST_CASE("advantages and targets against naive double loops") {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_real_distribution<double> val(-500, 2500), g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int Z = len(rng);
    std::vector<double> r(Z), v(Z);
    for (auto& x : r) x = val(rng);
    for (auto& x : v) x = val(rng);
    const double gamma = g(rng);
    const auto a = compute_gae(r, v, gamma), na = naive_advantages(r, v, gamma);
    const auto t = value_targets(r, gamma), nt = naive_targets(r, gamma);
    for (int z = 0; z < Z; ++z) {
      REQUIRE(std::abs(a[z] - na[z]) <= 1e-12 * std::max(1.0, std::abs(na[z])));
      REQUIRE(std::abs(t[z] - nt[z]) <= 1e-12 * std::max(1.0, std::abs(nt[z])));
    }
  }
}

TEST_CASE("clip function") {
  CHECK(clip_function(0.5, 0.2) == 0.8);
  CHECK(clip_function(1.0, 0.2) == 1.0);
  CHECK(clip_function(1.5, 0.2) == 1.2);
  CHECK(clip_function(0.8, 0.2) == 0.8);
  CHECK(clip_function(1.2, 0.2) == 1.2);
}

TEST_CASE("advantage normalization") {
  Eigen::VectorXd a(4);
  a << 1, 2, 3, 4;
  normalize_advantages(a);
  CHECK(std::abs(a.mean()) < 1e-15);
  CHECK(std::sqrt(a.squaredNorm() / 4) == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 7.0);
  normalize_advantages(flat);
  CHECK(flat.allFinite());
  CHECK(flat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("surrogate equals the advantage mean at ratio one") {
  ActorCritic net(testing::small_spec(), 3);
  std::mt19937_64 rng(4);
  auto batch = testing::random_batch(net, rng, 12, 0.2);
  const auto fwd = forward_batch(net, batch.features);
  for (int i = 0; i < 12; ++i)
    batch.log_prob_old(i) = squashed_log_prob(fwd.mean.col(i), net.log_std(), batch.raw_actions.col(i));
  CHECK(policy_ratios(batch, net).isApproxToConstant(1.0, 1e-12));
  CHECK(surrogate_loss(batch, net, 0.2) == doctest::Approx(batch.advantages.mean()).epsilon(1e-12));
  const double vl = (fwd.value.transpose() - batch.targets).squaredNorm() / 12;
  CHECK(value_loss(batch, net) == doctest::Approx(vl).epsilon(1e-12));
  const auto loss = ppo_loss(batch, net, 0.2, 0.5);
  CHECK(loss.objective == doctest::Approx(loss.surrogate - 0.5 * loss.value_loss).epsilon(1e-12));
}

TEST_CASE("loss gradient matches central differences") {
  std::mt19937_64 rng(21);
  for (int point = 0; point < 5; ++point) {
    ActorCritic net(testing::small_spec(), 100 + point);
    const auto batch = testing::random_batch(net, rng, 16, 0.2);
    const auto loss = ppo_loss(batch, net, 0.2, 0.5);
    for (long i = 0; i < net.params().size(); ++i) {
      ActorCritic plus = net, minus = net;
      plus.params()(i) += 1e-5;
      minus.params()(i) -= 1e-5;
      const double fd = -(ppo_loss(batch, plus, 0.2, 0.5).objective -
                          ppo_loss(batch, minus, 0.2, 0.5).objective) / 2e-5;
      const double an = loss.gradient(i);
      REQUIRE(std::abs(fd - an) <= 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-7);
    }
  }
}

TEST_CASE("buffer finalization") {
  EpisodeBuffer buf;
  for (int z = 1; z <= 3; ++z) {
    Transition t;
    t.reward = z;
    t.value_estimate = 0.5 * z;
    t.round_index = z;
    buf.transitions.push_back(t);
  }
  buf.finalize(1.0);
  CHECK(buf.targets == std::vector<double>{6, 5, 3});
  CHECK(buf.advantages == naive_advantages({1, 2, 3}, {0.5, 1, 1.5}, 1.0));
  buf.clear();
  CHECK(buf.size() == 0);
  CHECK(buf.advantages.empty());
}

TEST_CASE("config validation") {
  PpoConfig p;
  CHECK_NOTHROW(p.validate());
  p.gamma = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = PpoConfig{};
  p.minibatch_size = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = PpoConfig{};
  p.clip_epsilon = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("short training runs are deterministic and log every episode") {
  EnvConfig env;
  env.horizon = 64;
  PpoConfig ppo;
  ppo.minibatch_size = 32;
  ppo.update_epochs = 2;
  ppo.episodes = 3;
  const auto spec = testing::small_spec();
  const auto a = train(env, ppo, spec, 9);
  const auto b = train(env, ppo, spec, 9);
  const auto c = train(env, ppo, spec, 10);
  CHECK(a.policy.params() == b.policy.params());
  CHECK(a.adam == b.adam);
  CHECK_FALSE(a.policy.params() == c.policy.params());
  REQUIRE(a.log.size() == 3);
  CHECK(a.updates == 3 * 2 * 2);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.log[e].episode == int(e) + 1);
    CHECK(a.log[e].mean_reward == b.log[e].mean_reward);
    CHECK(a.log[e].updates == 4);
    CHECK(a.log[e].feasibility_rate >= 0.0);
    CHECK(a.log[e].feasibility_rate <= 1.0);
  }
}

TEST_CASE("evaluation report") {
  ActorCritic net(PolicySpec{}, 1);
  const EnvConfig env;
  const auto states = sample_states(env, 5, 77);
  CHECK(states == sample_states(env, 5, 77));
  const std::vector<double> oracle(5, 1000.0);
  const auto rep = evaluate(net, env, states, oracle);
  REQUIRE(rep.rows.size() == 5);
  double sum = 0;
  for (const auto& row : rep.rows) sum += row.reward;
  CHECK(rep.mean_reward() == doctest::Approx(sum / 5));
  REQUIRE(rep.oracle_ratio().has_value());
  CHECK(*rep.oracle_ratio() == doctest::Approx(rep.mean_reward() / 1000.0));
  CHECK_FALSE(evaluate(net, env, states).oracle_ratio().has_value());
}
