#pragma once

#include "qodc/env.hpp"
#include "qodc/oracle.hpp"

namespace qodc {

enum class BaselineKind { UniformRandom, OracleReplay };

/// Contract drawn uniformly from the decoded action box, ignoring the state:
/// f_k in (f_min, 1], r_k in [0, r_max).
Contract random_contract(const NetworkState& state, const EnvConfig& config, Rng& rng);

/// The oracle's optimum for this exact state.
OracleResult oracle_replay(const NetworkState& state, const EnvConfig& config,
                           const OracleOptions& options);

}  // namespace qodc
