#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qodc/config.hpp"

namespace qodc {

/// Exit codes shared by every verb.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutputDirEnv = "QODC_OUTPUT_DIR";

struct CommonOptions {
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> checkpoint;
};

/// --out, then the config's output_dir, then $QODC_OUTPUT_DIR, then "qodc_out".
std::filesystem::path resolve_output_dir(const CommonOptions& opts, const ExperimentConfig& cfg);

struct CompareRow {
  int state_id;
  double ppo_reward;
  double random_reward;
  double oracle_reward;
  bool ppo_feasible;
};

/// PPO, random baseline and oracle replay on the shared evaluation states.
std::vector<CompareRow> run_compare(const ExperimentConfig& cfg, const ActorCritic& policy);

struct SweepRow {
  double alpha;
  double bs_utility_mean;
  double device_utility_mean;
};

/// BS and Q-weighted device utility per alpha, averaged over `cfg.sweep.states`
/// evaluation states. Train mode trains one policy per alpha with the first
/// configured seed and stores it under `checkpoint_dir` when given.
std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& cfg, std::span<const double> alphas,
                                      SweepMode mode,
                                      const std::optional<std::filesystem::path>& checkpoint_dir);

int cmd_train(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_states(const CommonOptions& opts, const std::filesystem::path& states_file,
               std::ostream& out, std::ostream& err);
int cmd_alpha_sweep(const CommonOptions& opts, const std::optional<std::filesystem::path>& checkpoint_dir,
                    const std::optional<std::vector<double>>& alphas,
                    std::optional<SweepMode> mode, std::ostream& out, std::ostream& err);
int cmd_oracle(const CommonOptions& opts, const std::optional<std::string>& state_row,
               std::ostream& out, std::ostream& err);

}  // namespace qodc
