#pragma once

// Regret accounting: realized regret, pseudo-regret, Top-M regret, the
// interval-width budget Delta(T), and coverage of the confidence brackets.

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "mlcb/confidence.hpp"
#include "mlcb/trace.hpp"

namespace mlcb {

/// Partial sums of (loss_t - L*).
std::vector<double> realized_regret(std::span<const double> losses,
                                    double l_star);

/// Mean of the M smallest L_k^*.
double top_m_mean(std::span<const double> oracle, Index m);

/// (1/M) sum_{k in S} L_k^* - mean of the M smallest L_k^*.
/// Non-negative whenever |S| = M.
double topm_regret_increment(std::span<const Index> selected,
                             std::span<const double> oracle, Index m);

/// Delta(t) = sum_{n=1}^{n_{k*}} width_{k*}(n) + (1/M) sum_k sum_{n=1}^{n_k} width_k(n)
/// with the standard-scheme widths.
double interval_budget(std::span<const std::int64_t> counts, Index k_star,
                       Index m, std::span<const RegretBound> bounds,
                       const ConfidenceConfig& cfg);

/// Least-squares slope of ln(value) against ln(t) over points with
/// t1 <= t <= t2. Requires t2 >= 4 t1 and positive values on the window.
double loglog_slope(std::span<const double> t, std::span<const double> values,
                    double t1, double t2);

struct CoverageStats {
  std::uint64_t violations = 0;
  std::uint64_t total_checks = 0;
  /// Run-level indicator: some (k, t) bracket missed L_k^*.
  bool run_failed() const { return violations > 0; }
};

/// Counts (k, t) pairs with L_k^* outside [LCB_k, UCB_k] in recorded bounds.
CoverageStats coverage_stats(std::span<const RoundRecord> trace,
                             std::span<const double> oracle);

/// Compact: every round up to 1000, then `per_decade` log-spaced rounds.
/// Full: every round. The horizon T is always included.
enum class CheckpointMode { Compact, Full };
std::vector<Round> checkpoint_schedule(Round horizon, CheckpointMode mode,
                                       int per_decade = 20);

/// Log-spaced checkpoints only (no dense prefix), T included.
std::vector<Round> log_checkpoints(Round horizon, int per_decade = 20);

struct RegretTrace {
  Index experts = 0;
  std::vector<Round> checkpoints;
  std::vector<double> realized;
  /// NaN when L(u^t) is not available every round.
  std::vector<double> pseudo;
  std::vector<double> topm;
  /// NaN unless the standard scheme context was supplied.
  std::vector<double> interval_budget;
  /// L(u^t) at the checkpoint round, NaN when unavailable.
  std::vector<double> advice_loss;
  /// checkpoints x K training counts n_k(t).
  Eigen::MatrixXd trained;
  Eigen::VectorXd advisor_counts;
  /// Advisor counts over the final window (t > final_window_start).
  Eigen::VectorXd final_window_advisor_counts;
  CoverageStats coverage;
  /// Checkpoints where pseudo-regret exceeded Delta(t).
  std::uint64_t budget_exceedances = 0;
  double l_star = 0.0;
  bool has_oracle = false;
  bool has_pseudo = false;
};

/// Aggregates a stream of rounds into a RegretTrace.
class RegretAccumulator {
 public:
  struct BudgetContext {
    ConfidenceConfig cfg;
    std::vector<RegretBound> bounds;
  };

  RegretAccumulator(Index experts, Index m, std::vector<Round> checkpoints,
                    std::optional<std::vector<double>> oracle,
                    std::optional<BudgetContext> budget = std::nullopt,
                    Round final_window_start = 0);

  /// `ledger` reflects the state after round `rec.t`.
  void observe(const RoundRecord& rec, const ExpertLedger& ledger);

  const RegretTrace& trace() const { return trace_; }
  RegretTrace take() { return std::move(trace_); }

  double cumulative_realized() const { return realized_; }
  double cumulative_pseudo() const { return pseudo_; }
  double cumulative_topm() const { return topm_; }
  double current_budget() const;

 private:
  Index m_;
  std::vector<Round> checkpoints_;
  std::size_t next_checkpoint_ = 0;
  std::optional<std::vector<double>> oracle_;
  std::optional<BudgetContext> budget_;
  Round final_window_start_;
  Index k_star_ = 0;
  double realized_ = 0.0;
  double pseudo_ = 0.0;
  double topm_ = 0.0;
  bool pseudo_ok_ = true;
  std::vector<double> width_sums_;
  std::vector<std::int64_t> width_counts_;
  RegretTrace trace_;
};

}  // namespace mlcb
