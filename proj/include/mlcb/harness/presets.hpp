#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlcb/environments.hpp"
#include "mlcb/experts.hpp"
#include "mlcb/harness/config.hpp"
#include "mlcb/meta.hpp"

namespace mlcb::harness {

/// Everything a run needs besides the procedure: a fresh environment per
/// run, the expert specs, and the L_k^* table when one exists.
struct Scenario {
  std::string preset;
  Index experts = 0;
  std::function<std::unique_ptr<Environment>()> make_env;
  std::vector<ExpertSpec> expert_specs;
  std::optional<std::vector<double>> oracle;
  /// Monte-Carlo estimates (GLM only).
  std::vector<OracleEstimate> oracle_estimates;
};

const std::vector<std::string>& preset_names();

/// K implied by a preset and its parameters. Throws ConfigError.
Index preset_expert_count(const std::string& preset, const Json& params);

/// Builds the scenario; the GLM oracle table is estimated here once.
Scenario build_scenario(const ExperimentConfig& cfg);

/// Mean table of the default Bernoulli bank (K = 10, two arms each).
std::vector<Eigen::VectorXd> default_bank_means();

}  // namespace mlcb::harness
