#include "qodc/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qodc/baselines.hpp"
#include "qodc/checkpoint.hpp"
#include "qodc/csv.hpp"
#include "qodc/errors.hpp"

namespace qodc {

namespace fs = std::filesystem;

namespace {

ExperimentConfig load_or_default(const CommonOptions& opts) {
  if (!opts.config_path) return ExperimentConfig{};
  if (!fs::exists(*opts.config_path)) {
    throw ConfigError("config file not found: " + opts.config_path->string());
  }
  return load_config(*opts.config_path);
}

std::string seed_suffix(std::uint64_t seed) { return "seed" + std::to_string(seed); }

fs::path default_checkpoint(const CommonOptions& opts, const ExperimentConfig& cfg) {
  if (opts.checkpoint) return *opts.checkpoint;
  const auto seed = opts.seed.value_or(cfg.seeds.front());
  return resolve_output_dir(opts, cfg) / ("checkpoint_" + seed_suffix(seed) + ".bin");
}

ActorCritic load_policy(const fs::path& path, const ExperimentConfig& cfg) {
  if (!fs::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
  auto ckpt = load_checkpoint(path);
  if (ckpt.spec.feature_dim != cfg.env.feature_dim() || ckpt.spec.action_dim != cfg.env.action_dim()) {
    throw ConfigError("checkpoint dims do not match the configured type count");
  }
  return ActorCritic(ckpt.spec, std::move(ckpt.params));
}

std::string describe(const Contract& c) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (std::size_t k = 0; k < c.items.size(); ++k) {
    if (k) os << "  ";
    os << "type " << k + 1 << ": f=" << c.items[k].update_frequency
       << " r=" << c.items[k].reward;
  }
  return os.str();
}

// Runs `body`, mapping errors onto exit codes and a diagnostic line.
template <typename F>
int guarded(std::ostream& err, const char* verb, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << verb << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << verb << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

fs::path resolve_output_dir(const CommonOptions& opts, const ExperimentConfig& cfg) {
  if (opts.out_dir) return *opts.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "qodc_out";
}

std::vector<CompareRow> run_compare(const ExperimentConfig& cfg, const ActorCritic& policy) {
  const auto states = sample_states(cfg.env, cfg.eval.states, cfg.eval.seed);
  const auto report = evaluate(policy, cfg.env, states);
  Rng random_rng = make_rng(cfg.eval.seed, 4);
  std::vector<CompareRow> rows;
  rows.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto random = random_contract(states[i], cfg.env, random_rng);
    const auto oracle = oracle_replay(states[i], cfg.env, cfg.oracle);
    rows.push_back({static_cast<int>(i), report.rows[i].reward,
                    score_contract(states[i], random, cfg.env).reward, oracle.best_utility,
                    report.rows[i].feasible});
  }
  return rows;
}

std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& cfg, std::span<const double> alphas,
                                      SweepMode mode,
                                      const std::optional<fs::path>& checkpoint_dir) {
  if (alphas.empty()) throw InvalidArgument("alpha sweep: empty alpha list");
  std::vector<SweepRow> rows;
  for (double alpha : alphas) {
    EnvConfig env = cfg.env;
    env.alpha = alpha;
    env.validate();
    const auto states = sample_states(env, cfg.sweep.states, cfg.eval.seed);
    std::vector<Contract> contracts;
    if (mode == SweepMode::Oracle) {
      for (const auto& s : states) contracts.push_back(oracle_replay(s, env, cfg.oracle).best_contract);
    } else {
      const auto seed = cfg.seeds.front();
      auto trained = train(env, cfg.ppo, cfg.nn.policy_spec(env), seed);
      if (checkpoint_dir) {
        fs::create_directories(*checkpoint_dir);
        save_checkpoint(*checkpoint_dir / ("alpha_" + format_double(alpha) + ".bin"),
                        {trained.policy.spec(), trained.policy.params(), trained.adam});
      }
      for (auto& row : evaluate(trained.policy, env, states).rows) {
        contracts.push_back(std::move(row.contract));
      }
    }
    double bs = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto market = market_from_state(states[i], env);
      bs += score_contract(states[i], contracts[i], env).reward;
      dev += mean_device_utility(contracts[i], market.types);
    }
    const auto n = static_cast<double>(states.size());
    rows.push_back({alpha, bs / n, dev / n});
  }
  return rows;
}

int cmd_train(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, "train", [&] {
    const auto cfg = load_or_default(opts);
    const auto dir = resolve_output_dir(opts, cfg);
    fs::create_directories(dir);
    const auto seeds = opts.seed ? std::vector<std::uint64_t>{*opts.seed} : cfg.seeds;
    for (const auto seed : seeds) {
      const auto start = std::chrono::steady_clock::now();
      auto result = train(cfg.env, cfg.ppo, cfg.policy_spec(), seed);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      CsvWriter log(dir / ("train_log_" + seed_suffix(seed) + ".csv"),
                    {"episode", "mean_reward", "feasibility_rate", "surrogate_loss", "value_loss",
                     "policy_std_mean"});
      for (const auto& e : result.log) {
        log.cell(e.episode).cell(e.mean_reward).cell(e.feasibility_rate).cell(e.surrogate_loss)
            .cell(e.value_loss).cell(e.policy_std_mean);
        log.end_row();
      }
      log.close();
      const auto ckpt_path = dir / ("checkpoint_" + seed_suffix(seed) + ".bin");
      save_checkpoint(ckpt_path, {result.policy.spec(), result.policy.params(), result.adam});

      const auto eval = evaluate(result.policy, cfg.env, cfg.eval.states, cfg.eval.seed);
      const auto& last = result.log.back();
      out << "seed " << seed << ": " << result.log.size() << " episodes, " << result.updates
          << " updates, " << std::fixed << std::setprecision(1) << secs << " s; last episode "
          << "reward " << last.mean_reward << ", feasibility " << std::setprecision(3)
          << last.feasibility_rate << "; eval reward " << std::setprecision(1)
          << eval.mean_reward() << ", eval feasibility " << std::setprecision(3)
          << eval.feasibility_rate() << '\n'
          << std::defaultfloat;
      out << "  wrote " << ckpt_path.string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_compare(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, "compare", [&] {
    const auto cfg = load_or_default(opts);
    const auto policy = load_policy(default_checkpoint(opts, cfg), cfg);
    const auto rows = run_compare(cfg, policy);
    const auto dir = resolve_output_dir(opts, cfg);
    CsvWriter csv(dir / "compare.csv",
                  {"state_id", "ppo_reward", "random_reward", "oracle_reward", "ppo_feasible"});
    double ppo = 0.0, random = 0.0, oracle = 0.0;
    int feasible = 0;
    for (const auto& r : rows) {
      csv.cell(r.state_id).cell(r.ppo_reward).cell(r.random_reward).cell(r.oracle_reward)
          .cell(r.ppo_feasible ? 1 : 0);
      csv.end_row();
      ppo += r.ppo_reward;
      random += r.random_reward;
      oracle += r.oracle_reward;
      feasible += r.ppo_feasible ? 1 : 0;
    }
    csv.close();
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    out << std::fixed << std::setprecision(2) << "mean reward over " << rows.size()
        << " states: ppo " << ppo / n << ", random " << random / n << ", oracle " << oracle / n
        << "; ppo feasibility " << std::setprecision(3) << feasible / n << '\n'
        << std::defaultfloat;
    return kExitOk;
  });
}

int cmd_states(const CommonOptions& opts, const fs::path& states_file, std::ostream& out,
               std::ostream& err) {
  return guarded(err, "states", [&] {
    const auto cfg = load_or_default(opts);
    const auto policy = load_policy(default_checkpoint(opts, cfg), cfg);
    std::ifstream in(states_file);
    if (!in) throw ConfigError("cannot read states file " + states_file.string());

    std::vector<std::string> header{"state_id"};
    for (int k = 1; k <= cfg.env.type_count; ++k) {
      header.push_back("f_" + std::to_string(k));
      header.push_back("r_" + std::to_string(k));
    }
    header.insert(header.end(), {"feasible", "reward"});
    CsvWriter csv(resolve_output_dir(opts, cfg) / "states.csv", header);

    std::string line;
    int row = 0;
    int failures = 0;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
      ++row;
      try {
        const auto state = parse_state_row(line);
        validate_state(state, cfg.env);
        const auto eval = evaluate(policy, cfg.env, std::span(&state, 1));
        const auto& r = eval.rows.front();
        out << "state " << row << ": " << describe(r.contract) << "  feasible="
            << (r.feasible ? "yes" : "no") << " utility=" << r.reward << '\n';
        csv.cell(row);
        for (const auto& item : r.contract.items) csv.cell(item.update_frequency).cell(item.reward);
        csv.cell(r.feasible ? 1 : 0).cell(r.reward);
        csv.end_row();
      } catch (const Error& e) {
        ++failures;
        err << "states: row " << row << ": " << e.what() << '\n';
      }
    }
    csv.close();
    return failures == 0 ? kExitOk : kExitFailure;
  });
}

int cmd_alpha_sweep(const CommonOptions& opts, const std::optional<fs::path>& checkpoint_dir,
                    const std::optional<std::vector<double>>& alphas,
                    std::optional<SweepMode> mode, std::ostream& out, std::ostream& err) {
  return guarded(err, "alpha-sweep", [&] {
    const auto cfg = load_or_default(opts);
    const auto& grid = alphas ? *alphas : cfg.sweep.alphas;
    if (grid.empty()) throw ConfigError("alpha list is empty");
    auto run_cfg = cfg;
    if (opts.seed) run_cfg.seeds = {*opts.seed};
    const auto rows = run_alpha_sweep(run_cfg, grid, mode.value_or(cfg.sweep.mode), checkpoint_dir);
    CsvWriter csv(resolve_output_dir(opts, cfg) / "alpha_sweep.csv",
                  {"alpha", "bs_utility_mean", "device_utility_mean"});
    for (const auto& r : rows) {
      csv.cell(r.alpha).cell(r.bs_utility_mean).cell(r.device_utility_mean);
      csv.end_row();
      out << "alpha " << r.alpha << ": bs utility " << r.bs_utility_mean << ", device utility "
          << r.device_utility_mean << '\n';
    }
    csv.close();
    return kExitOk;
  });
}

int cmd_oracle(const CommonOptions& opts, const std::optional<std::string>& state_row,
               std::ostream& out, std::ostream& err) {
  return guarded(err, "oracle", [&] {
    const auto cfg = load_or_default(opts);
    NetworkState state;
    if (state_row) {
      state = parse_state_row(*state_row);
      validate_state(state, cfg.env);
    } else {
      Rng rng = make_rng(opts.seed.value_or(cfg.eval.seed), 5);
      state = sample_state(cfg.env, rng);
    }
    const auto result = oracle_replay(state, cfg.env, cfg.oracle);
    out << std::setprecision(17) << "contract: " << describe(result.best_contract) << '\n'
        << "utility: " << result.best_utility << '\n'
        << "feasible points: " << result.feasible_count << " of " << result.evaluated_count
        << " (last round)\n";
    return kExitOk;
  });
}

}  // namespace qodc
