#include <CLI11.hpp>
#include <iostream>

#include "qodc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Data-sharing contract design: PPO learner, grid oracle and experiments"};
  app.require_subcommand(1);

  qodc::CommonOptions opts;
  std::string config, out_dir, checkpoint;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment config file (INI)");
    cmd->add_option("--seed", seed, "Override the configured seed list");
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  };

  auto* train = app.add_subcommand("train", "Train PPO policies, one per seed");
  auto* compare = app.add_subcommand("compare", "Evaluate PPO against random and oracle");
  auto* states = app.add_subcommand("states", "Print the policy's contracts for given states");
  auto* sweep = app.add_subcommand("alpha-sweep", "Utilities across the AoI preference alpha");
  auto* oracle = app.add_subcommand("oracle", "Solve the grid oracle for one state");
  for (auto* c : {train, compare, states, sweep, oracle}) add_common(c);

  std::string states_file;
  states->add_option("states_file", states_file, "One state per line: M, K, A, D, Q.., phi..")
      ->required();

  std::string checkpoint_dir, mode;
  std::vector<double> alphas;
  sweep->add_option("--checkpoint-dir", checkpoint_dir, "Where train mode stores policies");
  sweep->add_option("--alphas", alphas, "Alpha values (default: config)")->delimiter(',');
  sweep->add_option("--mode", mode, "oracle or train")->check(CLI::IsMember({"oracle", "train"}));

  std::string state_row;
  oracle->add_option("--state", state_row, "State row; sampled when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every real parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? qodc::kExitOk : qodc::kExitUsage;
  }

  auto set_opt = [](auto& target, const std::string& v) {
    if (!v.empty()) target = v;
  };
  set_opt(opts.config_path, config);
  set_opt(opts.out_dir, out_dir);
  set_opt(opts.checkpoint, checkpoint);
  for (auto* c : {train, compare, states, sweep, oracle}) {
    if (c->parsed() && c->count("--seed")) opts.seed = seed;
  }

  if (train->parsed()) return qodc::cmd_train(opts, std::cout, std::cerr);
  if (compare->parsed()) return qodc::cmd_compare(opts, std::cout, std::cerr);
  if (states->parsed()) return qodc::cmd_states(opts, states_file, std::cout, std::cerr);
  if (sweep->parsed()) {
    std::optional<std::filesystem::path> dir;
    if (!checkpoint_dir.empty()) dir = checkpoint_dir;
    std::optional<std::vector<double>> grid;
    if (!alphas.empty()) grid = alphas;
    std::optional<qodc::SweepMode> m;
    if (mode == "oracle") m = qodc::SweepMode::Oracle;
    if (mode == "train") m = qodc::SweepMode::Train;
    return qodc::cmd_alpha_sweep(opts, dir, grid, m, std::cout, std::cerr);
  }
  std::optional<std::string> row;
  if (!state_row.empty()) row = state_row;
  return qodc::cmd_oracle(opts, row, std::cout, std::cerr);
}
