#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qodc/env.hpp"
#include "qodc/nn.hpp"
#include "qodc/oracle.hpp"
#include "qodc/ppo.hpp"

namespace qodc {

struct NetConfig {
  std::vector<std::size_t> hidden{64, 64};
  double log_std_init = -0.5;

  PolicySpec policy_spec(const EnvConfig& env) const {
    return {env.feature_dim(), env.action_dim(), hidden, log_std_init};
  }
  bool operator==(const NetConfig&) const = default;
};

struct EvalConfig {
  int states = 100;
  std::uint64_t seed = 20240;
  bool operator==(const EvalConfig&) const = default;
};

enum class SweepMode { Oracle, Train };

struct SweepConfig {
  std::vector<double> alphas;  // default 0, 0.05, ..., 1
  int states = 10;
  SweepMode mode = SweepMode::Oracle;

  SweepConfig();
  bool operator==(const SweepConfig&) const = default;
};

/// Everything one experiment run needs. Defaults reproduce the reference
/// setup: 40 devices in 2 types, beta 100, penalty -500, alpha 0.75,
/// gamma 0.95, batch 512, learning rate 1e-4, 1 ms slots.
struct ExperimentConfig {
  EnvConfig env;
  PpoConfig ppo;
  NetConfig nn;
  OracleOptions oracle;
  EvalConfig eval;
  SweepConfig sweep;
  std::string output_dir;  // empty: fall back to $QODC_OUTPUT_DIR, then "qodc_out"
  std::vector<std::uint64_t> seeds{312, 313, 314};

  void validate() const;
  PolicySpec policy_spec() const { return nn.policy_spec(env); }
  bool operator==(const ExperimentConfig&) const = default;
};

/// INI-style text: `[section]` headers and `key = value` lines. Every key is
/// optional; unknown sections or keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace qodc
