#pragma once

// Synthetic stochastic environments with known (or Monte-Carlo) optima.

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlcb/core.hpp"

namespace mlcb {

/// Expert k controls its own Bernoulli arms with loss means mu_{k,1..d_k}.
/// One outcome holds a Bernoulli draw for every arm of every expert, so the
/// outcome stream does not depend on which arms get played.
class BernoulliBankEnv : public Environment {
 public:
  explicit BernoulliBankEnv(std::vector<Eigen::VectorXd> means,
                            std::string name = "bernoulli-bank");

  std::string name() const override { return name_; }
  Index num_experts() const override { return means_.size(); }
  Index arms(Index k) const { return static_cast<Index>(means_.at(k).size()); }
  const std::vector<Eigen::VectorXd>& means() const { return means_; }

  Outcome sample(Rng& rng, Round t) const override;
  double loss(const Advice& advice, const Outcome& outcome) override;
  std::optional<double> expected_loss(const Advice& advice) const override;
  bool expected_loss_is_cheap() const override { return true; }
  /// min_j mu_{k,j}
  std::optional<double> oracle_optimum(Index k) const override;

 private:
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index total_arms_ = 0;
  std::string name_;
};

/// Two-armed mean table for the composite lower-bound game. `game` is the
/// 0-based index of the uniquely optimal expert, or nullopt for the null game.
///   optimal expert : (1/2 - eps/2, 1/2 - eps/2 - gap)
///   every other    : (1/2 + eps/2, 1/2 + eps/2 + gap)
/// Requires 0 <= gap <= eps <= 1/3.
Eigen::MatrixXd perturbed_game_means(std::optional<Index> game, Index experts,
                                     double eps, double gap);

BernoulliBankEnv make_perturbed_game_env(std::optional<Index> game,
                                         Index experts, double eps, double gap);

/// Bounded link function f: R -> [0, 1] with its derivative.
struct Link {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
};

enum class GlmLoss { Squared, Absolute };

struct GlmParams {
  Index dim = 5;
  /// Direction of the generating model; normalized on construction.
  Eigen::VectorXd w;
  std::vector<Link> links;
  /// 0-based index of the link that generates the labels.
  Index optimal = 0;
  /// Half-width of uniform label noise (0 = noiseless).
  double noise = 0.0;
  GlmLoss loss = GlmLoss::Squared;
  /// Radius of each expert's parameter ball (the hypothesis class).
  double radius = 1.0;
  /// Held-out sample size for Monte-Carlo L(u).
  Index eval_samples = 10000;
  std::uint64_t eval_seed = 0x5eed;
};

/// x uniform on the unit sphere, label r = f_{k*}(w'x) (+ noise), clipped.
/// Expert k predicts f_k(v'x) with its own parameter v.
class GlmEnv : public Environment {
 public:
  explicit GlmEnv(GlmParams params);

  std::string name() const override { return "glm"; }
  Index num_experts() const override { return params_.links.size(); }
  const GlmParams& params() const { return params_; }

  Outcome sample(Rng& rng, Round t) const override;
  double loss(const Advice& advice, const Outcome& outcome) override;
  Eigen::VectorXd loss_gradient(Index k, const Eigen::VectorXd& v,
                                const Outcome& outcome) const override;
  /// Monte-Carlo over a fixed held-out sample.
  std::optional<double> expected_loss(const Advice& advice) const override;
  std::optional<double> oracle_optimum(Index k) const override;

  /// Installs precomputed L_k^* values (see glm_oracle_optimum).
  void set_oracle_table(std::vector<double> table);

  double raw_loss(double prediction, double label) const;

 private:
  GlmParams params_;
  std::vector<double> oracle_;
  Eigen::MatrixXd eval_x_;
  Eigen::VectorXd eval_r_;
};

/// x drawn uniformly from the unit sphere in R^dim.
Eigen::VectorXd sample_unit_sphere(Index dim, Rng& rng);

struct OracleEstimate {
  double value = 0.0;
  double std_error = 0.0;
  /// Minimizer, as the coefficient c of v = c * w.
  double coefficient = 0.0;
};

/// Monte-Carlo estimate of L_k^* = min_{|v| <= R} E ell(f_k(v'x), r).
/// The search runs over v = c w, c in [-R, R] (x is isotropic, so the
/// component of v orthogonal to w only adds noise to the prediction).
OracleEstimate glm_oracle_optimum(const GlmEnv& env, Index k,
                                  Index samples = 1000000,
                                  std::uint64_t seed = 0x0c1e);

/// The ten-link family of the GLM model-selection preset; f_9 (index 8)
/// generates the labels and f_7, f_8 mimic it on the bulk of the data.
std::vector<Link> glm_appendix_a_links();

/// Preset GlmParams (K = 10, optimal index 8) with w drawn from `w_seed`.
GlmParams glm_appendix_a_params(Index dim = 5, std::uint64_t w_seed = 7);

}  // namespace mlcb
