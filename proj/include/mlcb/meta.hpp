#pragma once

// The M-LCB engine and the protocol runner shared with the baselines.
//
// Round t: compute bounds from history through t-1, pick the M lowest-LCB
// experts as S_t, the lowest-UCB member of S_t as advisor, play its safe
// advice, then train every member of S_t on the revealed outcome.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlcb/confidence.hpp"
#include "mlcb/experts.hpp"
#include "mlcb/metrics.hpp"
#include "mlcb/trace.hpp"

namespace mlcb {

/// Bottom-M by LCB; untrained experts (nullopt) count as -inf. Ties go to the
/// lowest index. Returned ids are sorted ascending.
std::vector<Index> select_training_set(std::span<const std::optional<double>> lcbs,
                                       Index m);

/// Lowest-UCB member of the training set. Untrained members are skipped while
/// a trained one exists; if none is trained, the lowest index wins.
Index select_advisor(std::span<const Index> training_set,
                     std::span<const std::optional<double>> ucbs);

/// A meta-procedure: chooses (S_t, i_t) and may learn from the training losses.
class Procedure {
 public:
  virtual ~Procedure() = default;
  virtual std::string name() const = 0;
  virtual Selection select(Round t, const ExpertLedger& ledger) = 0;
  /// Training losses of S_t, aligned with selection.training_set.
  virtual void observe(Round /*t*/, const Selection& /*selection*/,
                       std::span<const double> /*losses*/) {}
  /// Bounds behind the last selection, when the procedure keeps them.
  virtual const std::vector<std::optional<Bounds>>* last_bounds() const {
    return nullptr;
  }
};

class MlcbProcedure final : public Procedure {
 public:
  MlcbProcedure(Index m, ConfidenceConfig cfg, std::vector<RegretBound> bounds);

  std::string name() const override { return "m-lcb"; }
  Selection select(Round t, const ExpertLedger& ledger) override;
  const std::vector<std::optional<Bounds>>* last_bounds() const override {
    return &bounds_;
  }
  const ConfidenceConfig& config() const { return cfg_; }

 private:
  Index m_;
  ConfidenceConfig cfg_;
  std::vector<RegretBound> regret_bounds_;
  std::vector<std::optional<Bounds>> bounds_;
  std::vector<std::optional<double>> lcbs_;
  std::vector<std::optional<double>> ucbs_;
};

/// Error raised inside a round, tagged with the round index.
class RoundError : public std::runtime_error {
 public:
  RoundError(Round t, const std::string& what)
      : std::runtime_error("round " + std::to_string(t) + ": " + what),
        round_(t) {}
  Round round() const { return round_; }

 private:
  Round round_;
};

/// Counts of the per-round budget checks performed by a Runner.
struct BudgetAudit {
  std::uint64_t rounds = 0;
  std::uint64_t violations = 0;
  std::int64_t total_selected = 0;
};

struct RunnerOptions {
  Index budget = 1;
  std::uint64_t seed = 1;
  /// Copy the procedure's bounds into every RoundRecord.
  bool record_bounds = false;
  /// Sample a base action from distribution advice before playing it.
  bool sample_played_action = true;
  /// Keep I_k(t) round lists in the ledger.
  bool keep_rounds = false;
};

/// Executes the limited-advice protocol for one run.
class Runner {
 public:
  Runner(Environment& env, std::vector<std::unique_ptr<Expert>> experts,
         std::unique_ptr<Procedure> procedure, RunnerOptions options);

  RoundRecord run_round(Round t, bool want_expected_loss = true);

  const ExpertLedger& ledger() const { return ledger_; }
  const std::vector<std::unique_ptr<Expert>>& experts() const { return experts_; }
  Procedure& procedure() { return *procedure_; }
  const BudgetAudit& audit() const { return audit_; }
  Index budget() const { return options_.budget; }
  Environment& environment() { return env_; }

 private:
  void check_selection(const Selection& s, Round t) const;

  Environment& env_;
  std::vector<std::unique_ptr<Expert>> experts_;
  std::unique_ptr<Procedure> procedure_;
  RunnerOptions options_;
  ExpertLedger ledger_;
  Rng env_rng_;
  Rng play_rng_;
  BudgetAudit audit_;
};

struct HorizonOptions {
  Round horizon = 0;
  std::vector<Round> checkpoints;
  /// Supplies Delta(t) when the procedure runs the standard scheme.
  std::optional<RegretAccumulator::BudgetContext> budget;
  /// Rounds with t > final_window_start feed the final-window histogram.
  Round final_window_start = 0;
  /// Oracle table; defaults to the environment's own oracle if complete.
  std::optional<std::vector<double>> oracle;
  bool keep_records = false;
  /// Called for every round (e.g. a CSV sink).
  std::function<void(const RoundRecord&, const ExpertLedger&,
                     const RegretAccumulator&)>
      sink;
};

struct RunResult {
  RegretTrace trace;
  std::vector<RoundRecord> records;
  BudgetAudit audit;
  std::optional<std::string> error;
};

/// Environment oracle table when every expert has one.
std::optional<std::vector<double>> oracle_table(const Environment& env);

/// Runs rounds 1..T. Deterministic given the runner's seed. On a round error
/// the partial trace is returned with `error` set.
RunResult run_horizon(Runner& runner, HorizonOptions options);

}  // namespace mlcb
