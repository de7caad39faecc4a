#include "mlcb/harness/presets.hpp"

#include <cmath>

namespace mlcb::harness {

namespace {

double num(const Json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const Json& v = params[key];
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return v.get<double>();
}

std::vector<Eigen::VectorXd> bank_means(const Json& params) {
  if (!params.contains("means")) return default_bank_means();
  const Json& m = params["means"];
  if (!m.is_array() || m.empty())
    throw ConfigError("means must be a non-empty list of per-expert arm lists");
  std::vector<Eigen::VectorXd> out;
  for (const Json& row : m) {
    if (!row.is_array() || row.empty())
      throw ConfigError("each expert needs a non-empty list of arm means");
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) throw ConfigError("arm means must be numbers");
      v(static_cast<Eigen::Index>(j)) = row[j].get<double>();
      if (!(v(static_cast<Eigen::Index>(j)) >= 0.0 && v(static_cast<Eigen::Index>(j)) <= 1.0))
        throw ConfigError("arm means must lie in [0,1]");
    }
    out.push_back(std::move(v));
  }
  return out;
}

struct GameParams {
  Index experts;
  double eps;
  double gap;
  std::optional<Index> game;
};

GameParams game_params(const Json& params) {
  GameParams g;
  const double k = num(params, "K", 5);
  if (k < 1 || k != std::floor(k)) throw ConfigError("K must be a positive integer");
  g.experts = static_cast<Index>(k);
  g.eps = num(params, "epsilon", 0.2);
  g.gap = num(params, "gap", 0.1);
  if (params.contains("game") && !params["game"].is_null()) {
    const double h = num(params, "game", 1);
    if (h < 1 || h > k || h != std::floor(h))
      throw ConfigError("game must be null or an expert index in 1..K");
    g.game = static_cast<Index>(h) - 1;
  }
  // Range checks (throws on violation).
  perturbed_game_means(g.game, g.experts, g.eps, g.gap);
  return g;
}

GlmParams glm_params(const Json& params) {
  const double dim = num(params, "dim", 5);
  if (dim < 1 || dim != std::floor(dim)) throw ConfigError("dim must be a positive integer");
  GlmParams p = glm_appendix_a_params(static_cast<Index>(dim),
                                      static_cast<std::uint64_t>(num(params, "w_seed", 7)));
  const double opt = num(params, "optimal", 9);
  if (opt < 1 || opt > static_cast<double>(p.links.size()) || opt != std::floor(opt))
    throw ConfigError("optimal must be a link index in 1..10");
  p.optimal = static_cast<Index>(opt) - 1;
  p.noise = num(params, "noise", 0.0);
  if (!(p.noise >= 0.0 && p.noise <= 1.0)) throw ConfigError("noise in [0,1]");
  if (params.contains("loss")) {
    if (params["loss"] == "squared") p.loss = GlmLoss::Squared;
    else if (params["loss"] == "absolute") p.loss = GlmLoss::Absolute;
    else throw ConfigError("loss must be \"squared\" or \"absolute\"");
  }
  p.radius = num(params, "radius", p.radius);
  if (!(p.radius > 0.0)) throw ConfigError("radius must be positive");
  const double ev = num(params, "eval_samples", static_cast<double>(p.eval_samples));
  if (ev < 1) throw ConfigError("eval_samples must be >= 1");
  p.eval_samples = static_cast<Index>(ev);
  return p;
}

std::string str(const Json& j, const char* key, const std::string& fallback) {
  return j.contains(key) ? j[key].get<std::string>() : fallback;
}

ExpertSpec bandit_spec(Index arms, const Json& ov) {
  ExpertSpec s;
  Ucb1Rule r;
  r.arms = arms;
  r.bound_constant = num(ov, "bound_constant", r.bound_constant);
  r.advice_mode = str(ov, "advice", "probability") == "empirical"
                      ? BanditAdvice::EmpiricalMarginal
                      : BanditAdvice::ProbabilityVector;
  s.rule = r;
  s.wrapper = str(ov, "wrapper", "averaging") == "sampling" ? Wrapper::Sampling
                                                            : Wrapper::Averaging;
  return s;
}

}  // namespace

std::vector<Eigen::VectorXd> default_bank_means() {
  // Two experts with low-loss arms, eight far worse ones; the second arm of
  // each expert is 0.1 above its best.
  const double best[10] = {0.02, 0.1, 0.9, 0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97};
  std::vector<Eigen::VectorXd> out;
  for (double b : best) {
    Eigen::VectorXd v(2);
    v << b, std::min(1.0, b + 0.1);
    out.push_back(v);
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"bernoulli-bank", "perturbed-game",
                                              "glm-appendixA"};
  return names;
}

Index preset_expert_count(const std::string& preset, const Json& params) {
  if (preset == "bernoulli-bank") return bank_means(params).size();
  if (preset == "perturbed-game") return game_params(params).experts;
  if (preset == "glm-appendixA") return glm_params(params).links.size();
  throw ConfigError("unknown preset '" + preset + "'");
}

Scenario build_scenario(const ExperimentConfig& cfg) {
  Scenario sc;
  sc.preset = cfg.preset;
  const Json& ov = cfg.experts;
  if (cfg.preset == "bernoulli-bank" || cfg.preset == "perturbed-game") {
    std::vector<Eigen::VectorXd> means;
    if (cfg.preset == "bernoulli-bank") {
      means = bank_means(cfg.params);
    } else {
      const GameParams g = game_params(cfg.params);
      const Eigen::MatrixXd table = perturbed_game_means(g.game, g.experts, g.eps, g.gap);
      for (Eigen::Index k = 0; k < table.rows(); ++k) means.push_back(table.row(k).transpose());
    }
    sc.experts = means.size();
    const std::string name = cfg.preset;
    sc.make_env = [means, name] { return std::make_unique<BernoulliBankEnv>(means, name); };
    for (const auto& m : means) sc.expert_specs.push_back(bandit_spec(m.size(), ov));
    sc.oracle = oracle_table(*sc.make_env());
    return sc;
  }
  if (cfg.preset == "glm-appendixA") {
    const GlmParams p = glm_params(cfg.params);
    sc.experts = p.links.size();
    const GlmEnv probe(p);
    const auto samples = static_cast<Index>(num(cfg.params, "oracle_samples", 1e6));
    const auto seed = static_cast<std::uint64_t>(num(cfg.params, "oracle_seed", 3137));
    std::vector<double> table;
    for (Index k = 0; k < sc.experts; ++k) {
      sc.oracle_estimates.push_back(glm_oracle_optimum(probe, k, samples, seed));
      table.push_back(sc.oracle_estimates.back().value);
    }
    sc.oracle = table;
    sc.make_env = [p, table] {
      auto env = std::make_unique<GlmEnv>(p);
      env->set_oracle_table(table);
      return env;
    };
    for (Index k = 0; k < sc.experts; ++k) {
      ExpertSpec s;
      OgdRule r;
      r.radius = p.radius;
      // |d/dv (f(v'x) - r)^2| <= 2 * max|f'| <= 3 for every link of the family.
      r.lipschitz = num(ov, "lipschitz", 3.0);
      r.steps.eta0 = num(ov, "eta0", 1.0);
      r.steps.kind = str(ov, "step", "inverse-sqrt") == "constant"
                         ? StepSchedule::Kind::Constant
                         : StepSchedule::Kind::InverseSqrt;
      r.bound_constant = num(ov, "bound_constant", r.bound_constant);
      r.initial = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dim));
      s.rule = r;
      s.wrapper = str(ov, "wrapper", "averaging") == "sampling" ? Wrapper::Sampling
                                                                : Wrapper::Averaging;
      sc.expert_specs.push_back(s);
    }
    return sc;
  }
  throw ConfigError("unknown preset '" + cfg.preset + "'");
}

}  // namespace mlcb::harness
