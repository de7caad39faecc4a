#pragma once

// Shared vocabulary: outcomes, advice, losses and the environment contract.
//
// The meta layer never looks inside an Outcome; it only sees the scalar
// losses an Environment computes from (Advice, Outcome) pairs.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace mlcb {

using Index = std::size_t;
using Round = std::int64_t;
using Rng = std::mt19937_64;

/// Invalid configuration or precondition on user-facing parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside an expert or an environment.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One i.i.d. environment sample. The payload layout is private to the
/// environment that produced it.
struct Outcome {
  Eigen::VectorXd payload;
  Round round = 1;
};

enum class AdviceKind {
  Parameter,     // parameter vector of a parametric predictor
  Distribution,  // probability vector over the owner's base actions
  Action,        // single base action, value(0) holds its index
};

/// A point in the decision space, tagged with the expert whose advice map
/// produced it (the environment needs the owner to interpret the value).
struct Advice {
  AdviceKind kind = AdviceKind::Parameter;
  Index owner = 0;
  Eigen::VectorXd value;

  static Advice parameter(Index owner, Eigen::VectorXd v) {
    return {AdviceKind::Parameter, owner, std::move(v)};
  }
  static Advice distribution(Index owner, Eigen::VectorXd p) {
    return {AdviceKind::Distribution, owner, std::move(p)};
  }
  static Advice action(Index owner, Index a) {
    Eigen::VectorXd v(1);
    v(0) = static_cast<double>(a);
    return {AdviceKind::Action, owner, std::move(v)};
  }
  Index action_index() const { return static_cast<Index>(value(0)); }
};

/// True when every component is >= 0 and the total is 1 within `tol`.
bool on_simplex(const Eigen::Ref<const Eigen::VectorXd>& p, double tol = 1e-9);

/// min(1, max(0, raw)); throws NumericError("non-finite loss") on NaN/inf.
double clip_loss(double raw);

/// Counts how often raw losses had to be clipped into [0, 1].
class ClipCounter {
 public:
  double clip(double raw) {
    const double c = clip_loss(raw);
    if (c != raw) ++count_;
    return c;
  }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_ = 0;
};

/// Stream identifiers for the RNG fan-out of a single run.
enum class Stream : std::uint32_t {
  Environment = 1,
  ExpertSampling = 2,
  WrapperSampling = 3,
  Procedure = 4,
  Play = 5,
};

/// Independent generator for (master seed, stream, sub-index). Changing how
/// many draws one stream consumes never shifts another stream.
Rng spawn_rng(std::uint64_t master_seed, Stream stream, std::uint64_t sub = 0);

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index drawn from a probability vector.
Index sample_index(const Eigen::Ref<const Eigen::VectorXd>& p, Rng& rng);

/// Stochastic environment with bounded losses.
///
/// Implementations are single-consumer per run: `loss` may bump the clip
/// counter, so an instance is not shared between concurrently running runs.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual Index num_experts() const = 0;

  virtual Outcome sample(Rng& rng, Round t) const = 0;

  /// ell(u, xi), clipped into [0, 1].
  virtual double loss(const Advice& advice, const Outcome& outcome) = 0;

  /// L(u) = E_xi ell(u, xi) when it can be evaluated.
  virtual std::optional<double> expected_loss(const Advice& /*advice*/) const {
    return std::nullopt;
  }
  /// True when expected_loss is cheap enough to evaluate every round.
  virtual bool expected_loss_is_cheap() const { return false; }

  /// L_k^* in [0, 1], known analytically for synthetic environments.
  virtual std::optional<double> oracle_optimum(Index /*k*/) const {
    return std::nullopt;
  }

  /// Gradient of w -> ell(g_k(w), xi) for parametric experts.
  virtual Eigen::VectorXd loss_gradient(Index k,
                                        const Eigen::VectorXd& w,
                                        const Outcome& outcome) const;

  std::uint64_t clipped_losses() const { return clips_.count(); }

 protected:
  double clip(double raw) { return clips_.clip(raw); }

 private:
  ClipCounter clips_;
};

}  // namespace mlcb
