#pragma once

// Self-learning experts: state w_k, append-only history H_k, update rule A_k,
// advice map g_k and safe-advice wrapper v_k.

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "mlcb/core.hpp"
#include "mlcb/regret_bound.hpp"

namespace mlcb {

struct ExpertState {
  Eigen::VectorXd w;
  /// Number of updates applied; equals the expert's training count n_k.
  std::int64_t version = 0;
};

struct HistoryEntry {
  Eigen::VectorXd state;
  double loss = 0.0;
  /// Base action sampled by a bandit expert on this training round.
  std::optional<Index> action;
};

/// Append-only record of an expert's training sessions.
class ExpertHistory {
 public:
  void append(HistoryEntry entry, Eigen::VectorXd advice_snapshot);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<HistoryEntry>& entries() const { return entries_; }
  const std::vector<Eigen::VectorXd>& advice_snapshots() const {
    return snapshots_;
  }
  /// Running sum of advice snapshots, for O(dim) averaging.
  const Eigen::VectorXd& advice_sum() const { return advice_sum_; }
  double loss_sum() const { return loss_sum_; }

 private:
  std::vector<HistoryEntry> entries_;
  std::vector<Eigen::VectorXd> snapshots_;
  Eigen::VectorXd advice_sum_;
  double loss_sum_ = 0.0;
};

enum class Wrapper { Averaging, Sampling };

/// Which per-round vector a bandit expert stores as its advice snapshot.
enum class BanditAdvice {
  ProbabilityVector,  // the full distribution w_k^tau
  EmpiricalMarginal,  // one-hot of the action actually sampled
};

/// Averaging: (1/n) sum of snapshots. Sampling: one snapshot drawn uniformly.
/// Throws ConfigError("untrained expert queried for advice") on empty history.
Eigen::VectorXd safe_advice_value(const ExpertHistory& history, Wrapper wrapper,
                                  Rng& rng);

struct StepSchedule {
  enum class Kind { Constant, InverseSqrt };
  Kind kind = Kind::InverseSqrt;
  double eta0 = 1.0;

  /// Step size for the t-th update, t >= 1. Positive and non-increasing.
  double at(std::int64_t t) const;
};

/// Online gradient descent on the radius-R ball.
struct OgdRule {
  StepSchedule steps;
  double radius = 1.0;
  /// Gradient-norm bound G used by the regret bound.
  double lipschitz = 1.0;
  double bound_constant = 1.5;
  Eigen::VectorXd initial;
};

/// UCB1 over the expert's own d base arms (losses, not rewards).
struct Ucb1Rule {
  Index arms = 2;
  double bound_constant = 8.0;
  BanditAdvice advice_mode = BanditAdvice::ProbabilityVector;
};

/// Never learns; always advises the same point.
struct StaticRule {
  AdviceKind kind = AdviceKind::Parameter;
  Eigen::VectorXd value;
};

struct ExpertSpec {
  std::variant<OgdRule, Ucb1Rule, StaticRule> rule;
  Wrapper wrapper = Wrapper::Averaging;
  /// Overrides the rule's natural U_k when set.
  std::optional<RegretBound> bound;

  void validate() const;
};

/// w - eta * grad, projected onto the centred ball of the given radius.
Eigen::VectorXd ogd_step(const Eigen::VectorXd& w, const Eigen::VectorXd& grad,
                         double eta, double radius);

class Expert {
 public:
  Expert(Index id, ExpertState initial, RegretBound bound, Wrapper wrapper,
         Rng wrapper_rng);
  virtual ~Expert() = default;

  Expert(const Expert&) = delete;
  Expert& operator=(const Expert&) = delete;

  Index id() const { return id_; }
  const ExpertState& state() const { return state_; }
  const ExpertHistory& history() const { return history_; }
  const RegretBound& regret_bound() const { return bound_; }
  Wrapper wrapper() const { return wrapper_; }
  std::int64_t trained() const { return state_.version; }

  /// g_k(w_k) for the current state.
  virtual Advice advice() const = 0;

  /// v_k(H_k) over the training history so far.
  Advice safe_advice();

  /// Realized loss ell_k^t(w_k^t), append to history, then apply A_k.
  /// Returns the realized loss.
  double train(const Outcome& outcome, Environment& env);

 protected:
  struct Realized {
    double loss = 0.0;
    std::optional<Index> action;
  };

  virtual AdviceKind advice_kind() const = 0;
  virtual Realized realize(const Outcome& outcome, Environment& env) = 0;
  virtual Eigen::VectorXd advice_snapshot(const Realized& r) const;
  /// New state after the latest entry has been appended to the history.
  virtual Eigen::VectorXd next_state(const Outcome& outcome,
                                     const Environment& env) = 0;

  const ExpertState& current() const { return state_; }

 private:
  Index id_;
  ExpertState state_;
  ExpertHistory history_;
  RegretBound bound_;
  Wrapper wrapper_;
  Rng wrapper_rng_;
};

class OgdExpert final : public Expert {
 public:
  OgdExpert(Index id, OgdRule rule, RegretBound bound, Wrapper wrapper,
            Rng wrapper_rng);

  Advice advice() const override;
  const OgdRule& rule() const { return rule_; }

 protected:
  AdviceKind advice_kind() const override { return AdviceKind::Parameter; }
  Realized realize(const Outcome& outcome, Environment& env) override;
  Eigen::VectorXd next_state(const Outcome& outcome,
                             const Environment& env) override;

 private:
  OgdRule rule_;
};

class Ucb1Expert final : public Expert {
 public:
  Ucb1Expert(Index id, Ucb1Rule rule, RegretBound bound, Wrapper wrapper,
             Rng wrapper_rng, Rng sampling_rng);

  Advice advice() const override;
  const Eigen::VectorXd& arm_plays() const { return plays_; }
  const Eigen::VectorXd& arm_loss_sums() const { return loss_sums_; }

 protected:
  AdviceKind advice_kind() const override { return AdviceKind::Distribution; }
  Realized realize(const Outcome& outcome, Environment& env) override;
  Eigen::VectorXd advice_snapshot(const Realized& r) const override;
  Eigen::VectorXd next_state(const Outcome& outcome,
                             const Environment& env) override;

 private:
  Ucb1Rule rule_;
  Rng sampling_rng_;
  Eigen::VectorXd plays_;
  Eigen::VectorXd loss_sums_;
};

class StaticExpert final : public Expert {
 public:
  StaticExpert(Index id, StaticRule rule, Wrapper wrapper, Rng wrapper_rng);

  Advice advice() const override;

 protected:
  AdviceKind advice_kind() const override { return rule_.kind; }
  Realized realize(const Outcome& outcome, Environment& env) override;
  Eigen::VectorXd next_state(const Outcome& outcome,
                             const Environment& env) override;

 private:
  StaticRule rule_;
};

/// Natural U_k of a rule (OGD: 1.5 G D sqrt(n), UCB1: c sqrt(d n log(nd/delta)),
/// Static: 0), unless the spec overrides it.
RegretBound regret_bound_for(const ExpertSpec& spec);

/// Builds expert `id` with RNG streams spawned from the run's master seed.
std::unique_ptr<Expert> make_expert(Index id, const ExpertSpec& spec,
                                    std::uint64_t master_seed);

}  // namespace mlcb
