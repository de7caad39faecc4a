#include "mlcb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mlcb {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> realized_regret(std::span<const double> losses,
                                    double l_star) {
  std::vector<double> out;
  out.reserve(losses.size());
  double acc = 0.0;
  for (double l : losses) {
    acc += l - l_star;
    out.push_back(acc);
  }
  return out;
}

double top_m_mean(std::span<const double> oracle, Index m) {
  if (m < 1 || m > oracle.size())
    throw ConfigError("M must satisfy 1 <= M <= K");
  std::vector<double> sorted(oracle.begin(), oracle.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<long>(m),
                    sorted.end());
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(m),
                         0.0) /
         static_cast<double>(m);
}

double topm_regret_increment(std::span<const Index> selected,
                             std::span<const double> oracle, Index m) {
  if (oracle.empty()) throw ConfigError("Top-M regret requires an oracle");
  if (selected.size() > m) throw ConfigError("|S_t| exceeds the budget M");
  double s = 0.0;
  for (Index k : selected) s += oracle[k];
  return s / static_cast<double>(m) - top_m_mean(oracle, m);
}

double interval_budget(std::span<const std::int64_t> counts, Index k_star,
                       Index m, std::span<const RegretBound> bounds,
                       const ConfidenceConfig& cfg) {
  if (counts.size() != bounds.size())
    throw ConfigError("one regret bound per expert required");
  if (k_star >= counts.size()) throw ConfigError("k* out of range");
  if (m < 1) throw ConfigError("M must be >= 1");
  auto sum_widths = [&](Index k) {
    double s = 0.0;
    for (std::int64_t n = 1; n <= counts[k]; ++n)
      s += interval_width(n, bounds[k], cfg);
    return s;
  };
  double others = 0.0;
  for (Index k = 0; k < counts.size(); ++k) others += sum_widths(k);
  return sum_widths(k_star) + others / static_cast<double>(m);
}

double loglog_slope(std::span<const double> t, std::span<const double> values,
                    double t1, double t2) {
  if (t.size() != values.size())
    throw ConfigError("series and time axis differ in length");
  if (!(t1 > 0.0) || t2 < 4.0 * t1)
    throw ConfigError("slope window needs t1 > 0 and t2 >= 4 t1");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 || t[i] > t2) continue;
    if (!(values[i] > 0.0)) throw NumericError("regret not yet positive");
    const double x = std::log(t[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw ConfigError("slope window holds fewer than two points");
  const double nd = static_cast<double>(n);
  const double den = nd * sxx - sx * sx;
  return (nd * sxy - sx * sy) / den;
}

CoverageStats coverage_stats(std::span<const RoundRecord> trace,
                             std::span<const double> oracle) {
  CoverageStats s;
  for (const RoundRecord& rec : trace) {
    for (std::size_t k = 0; k < rec.bounds.size() && k < oracle.size(); ++k) {
      if (!rec.bounds[k]) continue;
      ++s.total_checks;
      if (oracle[k] < rec.bounds[k]->lcb || oracle[k] > rec.bounds[k]->ucb)
        ++s.violations;
    }
  }
  return s;
}

std::vector<Round> log_checkpoints(Round horizon, int per_decade) {
  std::vector<Round> out;
  if (horizon < 1) return out;
  const double step = std::pow(10.0, 1.0 / per_decade);
  for (double x = 1.0; x < static_cast<double>(horizon); x *= step) {
    const auto r = static_cast<Round>(std::llround(x));
    if (out.empty() || r > out.back()) out.push_back(r);
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

std::vector<Round> checkpoint_schedule(Round horizon, CheckpointMode mode,
                                       int per_decade) {
  std::vector<Round> out;
  if (horizon < 1) return out;
  if (mode == CheckpointMode::Full) {
    out.resize(static_cast<std::size_t>(horizon));
    std::iota(out.begin(), out.end(), Round{1});
    return out;
  }
  const Round dense = std::min<Round>(horizon, 1000);
  for (Round t = 1; t <= dense; ++t) out.push_back(t);
  for (Round r : log_checkpoints(horizon, per_decade))
    if (r > out.back()) out.push_back(r);
  return out;
}

// ---------------------------------------------------------------------------

RegretAccumulator::RegretAccumulator(Index experts, Index m,
                                     std::vector<Round> checkpoints,
                                     std::optional<std::vector<double>> oracle,
                                     std::optional<BudgetContext> budget,
                                     Round final_window_start)
    : m_(m),
      checkpoints_(std::move(checkpoints)),
      oracle_(std::move(oracle)),
      budget_(std::move(budget)),
      final_window_start_(final_window_start),
      width_sums_(experts, 0.0),
      width_counts_(experts, 0) {
  trace_.experts = experts;
  trace_.advisor_counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(experts));
  trace_.final_window_advisor_counts = trace_.advisor_counts;
  trace_.trained.resize(static_cast<Eigen::Index>(checkpoints_.size()),
                        static_cast<Eigen::Index>(experts));
  if (oracle_) {
    if (oracle_->size() != experts)
      throw ConfigError("oracle table must have one entry per expert");
    const auto it = std::min_element(oracle_->begin(), oracle_->end());
    k_star_ = static_cast<Index>(it - oracle_->begin());
    trace_.l_star = *it;
    trace_.has_oracle = true;
  }
  if (budget_ && budget_->bounds.size() != experts)
    throw ConfigError("one regret bound per expert required");
  if (budget_ && budget_->cfg.scheme != Scheme::Standard) budget_.reset();
}

double RegretAccumulator::current_budget() const {
  if (!budget_ || !oracle_) return kNaN;
  double others = 0.0;
  for (double w : width_sums_) others += w;
  return width_sums_[k_star_] + others / static_cast<double>(m_);
}

void RegretAccumulator::observe(const RoundRecord& rec,
                                const ExpertLedger& ledger) {
  if (oracle_) {
    realized_ += rec.loss - trace_.l_star;
    if (rec.advice_expected_loss && pseudo_ok_) {
      pseudo_ += *rec.advice_expected_loss - trace_.l_star;
    } else {
      pseudo_ok_ = false;
    }
    topm_ += topm_regret_increment(rec.training_set, *oracle_, m_);
    for (std::size_t k = 0; k < rec.bounds.size(); ++k) {
      if (!rec.bounds[k]) continue;
      ++trace_.coverage.total_checks;
      const double lk = (*oracle_)[k];
      if (lk < rec.bounds[k]->lcb || lk > rec.bounds[k]->ucb)
        ++trace_.coverage.violations;
    }
  }
  if (budget_) {
    for (Index k : rec.training_set) {
      while (width_counts_[k] < ledger.trained(k)) {
        ++width_counts_[k];
        width_sums_[k] += interval_width(width_counts_[k], budget_->bounds[k],
                                         budget_->cfg);
      }
    }
  }
  trace_.advisor_counts(static_cast<Eigen::Index>(rec.advisor)) += 1.0;
  if (rec.t > final_window_start_)
    trace_.final_window_advisor_counts(static_cast<Eigen::Index>(rec.advisor)) += 1.0;

  while (next_checkpoint_ < checkpoints_.size() &&
         checkpoints_[next_checkpoint_] < rec.t)
    ++next_checkpoint_;
  if (next_checkpoint_ >= checkpoints_.size() ||
      checkpoints_[next_checkpoint_] != rec.t)
    return;

  const auto row = static_cast<Eigen::Index>(trace_.checkpoints.size());
  trace_.checkpoints.push_back(rec.t);
  trace_.realized.push_back(oracle_ ? realized_ : kNaN);
  trace_.has_pseudo = oracle_ && pseudo_ok_;
  trace_.pseudo.push_back(trace_.has_pseudo ? pseudo_ : kNaN);
  trace_.topm.push_back(oracle_ ? topm_ : kNaN);
  const double delta_t = current_budget();
  trace_.interval_budget.push_back(delta_t);
  trace_.advice_loss.push_back(rec.advice_expected_loss.value_or(kNaN));
  for (Index k = 0; k < ledger.size(); ++k)
    trace_.trained(row, static_cast<Eigen::Index>(k)) =
        static_cast<double>(ledger.trained(k));
  if (oracle_ && pseudo_ok_ && std::isfinite(delta_t) && pseudo_ > delta_t)
    ++trace_.budget_exceedances;
  ++next_checkpoint_;
}

}  // namespace mlcb
