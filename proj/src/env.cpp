#include "qodc/env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

void EnvConfig::validate() const {
  if (device_count < 1) throw InvalidArgument("env: device_count must be >= 1");
  if (type_count < 1) throw InvalidArgument("env: type_count must be >= 1");
  if (!(phi_range.lo > 0.0 && phi_range.hi > phi_range.lo)) {
    throw InvalidArgument("env: phi range must be positive and non-empty");
  }
  if (!(cap_range.lo > 0.0 && cap_range.hi > cap_range.lo)) {
    throw InvalidArgument("env: cap range must be positive and non-empty");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("env: alpha must lie in [0, 1]");
  if (!(unit_profit > 0.0)) throw InvalidArgument("env: unit_profit must be positive");
  if (!(penalty < 0.0)) throw InvalidArgument("env: penalty must be negative");
  if (!(data_size_bits > 0.0 && rate_bps > 0.0)) {
    throw InvalidArgument("env: slot size and rate must be positive");
  }
  if (!(f_min > 0.0 && f_min < 1.0)) throw InvalidArgument("env: f_min must lie in (0, 1)");
  if (!(r_max > 0.0)) throw InvalidArgument("env: r_max must be positive");
  if (horizon < 1) throw InvalidArgument("env: horizon must be >= 1");
}

Interval EnvConfig::phi_interval(int type_index) const {
  const double width = (phi_range.hi - phi_range.lo) / type_count;
  const double lo = phi_range.lo + width * type_index;
  const double hi = type_index + 1 == type_count ? phi_range.hi : lo + width;
  return {lo, hi};
}

void validate_state(const NetworkState& state, const EnvConfig& config) {
  const auto K = static_cast<std::size_t>(state.type_count);
  if (state.device_count < 1) throw InvalidArgument("state: M must be >= 1");
  if (state.type_count != config.type_count) {
    throw InvalidArgument("state has K=" + std::to_string(state.type_count) + ", expected " +
                          std::to_string(config.type_count));
  }
  if (state.probabilities.size() != K || state.phis.size() != K) {
    throw InvalidArgument("state: Q and phi must have K entries");
  }
  double total = 0.0;
  for (double q : state.probabilities) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("state: Q entries must lie in [0, 1]");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("state: Q must sum to 1");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(state.phis[k] > 0.0)) throw InvalidArgument("state: phi must be positive");
    if (k > 0 && state.phis[k] < state.phis[k - 1]) {
      throw InvalidArgument("state: phi must be ascending");
    }
  }
  const auto in_caps = [&](double v) { return v >= config.cap_range.lo && v <= config.cap_range.hi; };
  if (!in_caps(state.max_aoi) || !in_caps(state.max_latency)) {
    throw InvalidArgument("state: AoI/latency caps outside the sampling interval");
  }
}

NetworkState sample_state(const EnvConfig& config, Rng& rng) {
  const auto K = static_cast<std::size_t>(config.type_count);
  NetworkState s;
  s.device_count = config.device_count;
  s.type_count = config.type_count;
  s.phis.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto band = config.phi_interval(static_cast<int>(k));
    s.phis[k] = std::uniform_real_distribution<double>(band.lo, band.hi)(rng);
  }
  // Flat Dirichlet: normalised unit-rate exponentials. The last share is the
  // complement so the vector sums to one.
  std::exponential_distribution<double> unit_gamma(1.0);
  std::vector<double> g(K);
  double total = 0.0;
  for (auto& x : g) {
    x = unit_gamma(rng);
    total += x;
  }
  s.probabilities.resize(K);
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    s.probabilities[k] = g[k] / total;
    head += s.probabilities[k];
  }
  s.probabilities[K - 1] = std::max(0.0, 1.0 - head);
  std::uniform_real_distribution<double> caps(config.cap_range.lo, config.cap_range.hi);
  s.max_aoi = caps(rng);
  s.max_latency = caps(rng);
  return s;
}

Contract decode_action(std::span<const double> raw, const EnvConfig& config) {
  if (raw.size() != config.action_dim()) {
    throw InvalidArgument("action has " + std::to_string(raw.size()) + " coordinates, expected " +
                          std::to_string(config.action_dim()));
  }
  Contract c;
  c.items.resize(static_cast<std::size_t>(config.type_count));
  for (std::size_t k = 0; k < c.items.size(); ++k) {
    const double uf = (std::clamp(raw[2 * k], -1.0, 1.0) + 1.0) / 2.0;
    const double ur = (std::clamp(raw[2 * k + 1], -1.0, 1.0) + 1.0) / 2.0;
    c.items[k].update_frequency = config.f_min + uf * (1.0 - config.f_min);
    c.items[k].reward = ur * config.r_max;
  }
  return c;
}

MarketConfig market_from_state(const NetworkState& state, const EnvConfig& config) {
  std::vector<DeviceType> types(state.phis.size());
  for (std::size_t k = 0; k < types.size(); ++k) {
    types[k] = {state.phis[k], state.probabilities[k]};
  }
  return MarketConfig(state.device_count, config.unit_profit, config.alpha, config.slot(),
                      FreshnessCaps(state.max_aoi, state.max_latency), std::move(types));
}

ContractOutcome score_contract(const NetworkState& state, const Contract& contract,
                               const EnvConfig& config) {
  const auto market = market_from_state(state, config);
  if (!is_feasible(contract, market.types)) return {config.penalty, false};
  try {
    return {bs_utility(contract, market), true};
  } catch (const DomainError&) {
    return {config.penalty, false};
  }
}

StepOutcome step(const NetworkState& state, std::span<const double> raw, const EnvConfig& config,
                 Rng& rng) {
  auto contract = decode_action(raw, config);
  const auto scored = score_contract(state, contract, config);
  return {scored.reward, scored.feasible, std::move(contract), sample_state(config, rng)};
}

std::vector<double> state_features(const NetworkState& state, const EnvConfig& config) {
  const double cap_width = config.cap_range.hi - config.cap_range.lo;
  std::vector<double> out;
  out.reserve(config.feature_dim());
  out.push_back((state.max_aoi - config.cap_range.lo) / cap_width);
  out.push_back((state.max_latency - config.cap_range.lo) / cap_width);
  out.insert(out.end(), state.probabilities.begin(), state.probabilities.end());
  for (double phi : state.phis) out.push_back(phi / config.phi_range.hi);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n[");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n]");
  return s.substr(b, e - b + 1);
}

}  // namespace

NetworkState parse_state_row(std::string_view row) {
  std::vector<double> values;
  std::size_t pos = 0;
  const auto body = trim(row);
  while (pos <= body.size()) {
    const auto comma = body.find(',', pos);
    const auto token = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
      throw InvalidArgument("state row: cannot parse '" + std::string(token) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (values.size() < 2) throw InvalidArgument("state row: expected at least M and K");
  const double m = values[0];
  const double k = values[1];
  if (m < 1 || m != std::floor(m) || k < 1 || k != std::floor(k)) {
    throw InvalidArgument("state row: M and K must be positive integers");
  }
  const auto K = static_cast<std::size_t>(k);
  if (values.size() != 4 + 2 * K) {
    throw InvalidArgument("state row: expected " + std::to_string(4 + 2 * K) + " values, got " +
                          std::to_string(values.size()));
  }
  NetworkState s;
  s.device_count = static_cast<int>(m);
  s.type_count = static_cast<int>(K);
  s.max_aoi = values[2];
  s.max_latency = values[3];
  s.probabilities.assign(values.begin() + 4, values.begin() + 4 + static_cast<long>(K));
  s.phis.assign(values.begin() + 4 + static_cast<long>(K), values.end());
  return s;
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  rng_ = make_rng(config_.seed, 0);
}

const NetworkState& Environment::reset() {
  state_ = sample_state(config_, rng_);
  return state_;
}

StepOutcome Environment::step(std::span<const double> raw) {
  auto outcome = qodc::step(state_, raw, config_, rng_);
  state_ = outcome.next_state;
  return outcome;
}

}  // namespace qodc
