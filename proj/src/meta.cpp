#include "mlcb/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mlcb {

std::vector<Index> select_training_set(std::span<const std::optional<double>> lcbs,
                                       Index m) {
  const Index k = lcbs.size();
  if (m < 1 || m > k) throw ConfigError("M must satisfy 1 <= M <= K");
  for (const auto& v : lcbs)
    if (v && std::isnan(*v)) throw NumericError("NaN lower confidence bound");

  std::vector<Index> order(k);
  std::iota(order.begin(), order.end(), Index{0});
  // Untrained first, then by LCB; stable keeps index order among ties.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (!lcbs[a] || !lcbs[b]) return !lcbs[a] && lcbs[b];
    return *lcbs[a] < *lcbs[b];
  });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

Index select_advisor(std::span<const Index> training_set,
                     std::span<const std::optional<double>> ucbs) {
  if (training_set.empty())
    throw std::logic_error("advisor requested from an empty training set");
  std::optional<Index> best;
  for (Index k : training_set) {
    if (!ucbs[k]) continue;
    if (!best || *ucbs[k] < *ucbs[*best] ||
        (*ucbs[k] == *ucbs[*best] && k < *best))
      best = k;
  }
  if (best) return *best;
  return *std::min_element(training_set.begin(), training_set.end());
}

// ---------------------------------------------------------------------------

MlcbProcedure::MlcbProcedure(Index m, ConfidenceConfig cfg,
                             std::vector<RegretBound> bounds)
    : m_(m), cfg_(cfg), regret_bounds_(std::move(bounds)) {
  cfg_.validate();
  const Index k = regret_bounds_.size();
  if (cfg_.experts != k)
    throw ConfigError("confidence config K differs from the expert count");
  if (m_ < 1 || m_ > k) throw ConfigError("M must satisfy 1 <= M <= K");
  bounds_.resize(k);
  lcbs_.resize(k);
  ucbs_.resize(k);
}

Selection MlcbProcedure::select(Round /*t*/, const ExpertLedger& ledger) {
  for (Index k = 0; k < regret_bounds_.size(); ++k) {
    const std::int64_t n = ledger.trained(k);
    if (n == 0) {
      bounds_[k].reset();
      lcbs_[k].reset();
      ucbs_[k].reset();
      continue;
    }
    bounds_[k] = compute_bounds(ledger.running_loss(k), n, regret_bounds_[k], cfg_);
    lcbs_[k] = bounds_[k]->lcb;
    ucbs_[k] = bounds_[k]->ucb;
  }
  Selection s;
  s.training_set = select_training_set(lcbs_, m_);
  s.advisor = select_advisor(s.training_set, ucbs_);
  return s;
}

// ---------------------------------------------------------------------------

Runner::Runner(Environment& env, std::vector<std::unique_ptr<Expert>> experts,
               std::unique_ptr<Procedure> procedure, RunnerOptions options)
    : env_(env),
      experts_(std::move(experts)),
      procedure_(std::move(procedure)),
      options_(options),
      ledger_(experts_.size(), options.keep_rounds),
      env_rng_(spawn_rng(options.seed, Stream::Environment)),
      play_rng_(spawn_rng(options.seed, Stream::Play)) {
  if (experts_.empty()) throw ConfigError("need at least one expert");
  if (experts_.size() != env_.num_experts())
    throw ConfigError("expert count differs from the environment's K");
  if (options_.budget < 1 || options_.budget > experts_.size())
    throw ConfigError("M must satisfy 1 <= M <= K");
  for (Index k = 0; k < experts_.size(); ++k)
    if (experts_[k]->id() != k) throw ConfigError("expert ids must be 0..K-1");
}

void Runner::check_selection(const Selection& s, Round t) const {
  const auto& set = s.training_set;
  bool ok = !set.empty() && set.size() <= options_.budget;
  for (std::size_t i = 0; ok && i < set.size(); ++i) {
    ok = set[i] < experts_.size();
    for (std::size_t j = 0; ok && j < i; ++j) ok = set[i] != set[j];
  }
  ok = ok && std::find(set.begin(), set.end(), s.advisor) != set.end();
  if (!ok)
    throw RoundError(t, "procedure '" + procedure_->name() +
                            "' violated the budget (|S_t| <= M, i_t in S_t)");
}

RoundRecord Runner::run_round(Round t, bool want_expected_loss) {
  RoundRecord rec;
  rec.t = t;
  try {
    Selection sel = procedure_->select(t, ledger_);
    ++audit_.rounds;
    try {
      check_selection(sel, t);
    } catch (...) {
      ++audit_.violations;
      throw;
    }
    if (options_.record_bounds)
      if (const auto* b = procedure_->last_bounds()) rec.bounds = *b;

    Expert& advisor = *experts_[sel.advisor];
    rec.advice = advisor.trained() > 0 ? advisor.safe_advice() : advisor.advice();

    const Outcome outcome = env_.sample(env_rng_, t);
    if (rec.advice.kind == AdviceKind::Distribution && options_.sample_played_action) {
      const Index a = sample_index(rec.advice.value, play_rng_);
      rec.loss = env_.loss(Advice::action(rec.advice.owner, a), outcome);
    } else {
      rec.loss = env_.loss(rec.advice, outcome);
    }
    if (want_expected_loss) rec.advice_expected_loss = env_.expected_loss(rec.advice);

    const std::int64_t before = ledger_.total_trained();
    rec.expert_losses.reserve(sel.training_set.size());
    for (Index k : sel.training_set) {
      const std::int64_t n_before = ledger_.trained(k);
      const double l = experts_[k]->train(outcome, env_);
      ledger_.record(k, l, t);
      if (experts_[k]->trained() != ledger_.trained(k) ||
          ledger_.trained(k) != n_before + 1)
        ++audit_.violations;
      rec.expert_losses.push_back(l);
    }
    if (ledger_.total_trained() != before + static_cast<std::int64_t>(sel.training_set.size()))
      ++audit_.violations;
    audit_.total_selected += static_cast<std::int64_t>(sel.training_set.size());

    procedure_->observe(t, sel, rec.expert_losses);
    rec.training_set = std::move(sel.training_set);
    rec.advisor = sel.advisor;
  } catch (const RoundError&) {
    throw;
  } catch (const std::exception& e) {
    throw RoundError(t, e.what());
  }
  return rec;
}

// ---------------------------------------------------------------------------

std::optional<std::vector<double>> oracle_table(const Environment& env) {
  std::vector<double> table;
  for (Index k = 0; k < env.num_experts(); ++k) {
    const auto v = env.oracle_optimum(k);
    if (!v) return std::nullopt;
    table.push_back(*v);
  }
  return table;
}

RunResult run_horizon(Runner& runner, HorizonOptions options) {
  RunResult result;
  const Index k = runner.experts().size();
  auto oracle = options.oracle ? options.oracle : oracle_table(runner.environment());
  std::vector<Round> checkpoints = options.checkpoints;
  if (checkpoints.empty())
    checkpoints = checkpoint_schedule(options.horizon, CheckpointMode::Compact);
  RegretAccumulator acc(k, runner.budget(), checkpoints, oracle,
                        std::move(options.budget), options.final_window_start);
  const bool cheap = runner.environment().expected_loss_is_cheap();
  std::size_t next_cp = 0;
  try {
    for (Round t = 1; t <= options.horizon; ++t) {
      while (next_cp < checkpoints.size() && checkpoints[next_cp] < t) ++next_cp;
      const bool at_cp = next_cp < checkpoints.size() && checkpoints[next_cp] == t;
      RoundRecord rec = runner.run_round(t, cheap || at_cp);
      acc.observe(rec, runner.ledger());
      if (options.sink) options.sink(rec, runner.ledger(), acc);
      if (options.keep_records) result.records.push_back(std::move(rec));
    }
  } catch (const RoundError& e) {
    result.error = e.what();
  }
  result.trace = acc.take();
  result.audit = runner.audit();
  return result;
}

}  // namespace mlcb
