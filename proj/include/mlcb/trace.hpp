#pragma once

#include <optional>
#include <vector>

#include "mlcb/confidence.hpp"
#include "mlcb/core.hpp"

namespace mlcb {

/// Training set S_t and advisor i_t chosen for one round.
struct Selection {
  std::vector<Index> training_set;
  Index advisor = 0;
};

/// Per-expert bookkeeping: training count n_k, loss sum over I_k(t), and
/// optionally the rounds I_k(t) themselves.
class ExpertLedger {
 public:
  explicit ExpertLedger(Index experts = 0, bool keep_rounds = false)
      : trained_(experts, 0), loss_sum_(experts, 0.0), keep_rounds_(keep_rounds) {
    if (keep_rounds_) rounds_.resize(experts);
  }

  Index size() const { return trained_.size(); }
  std::int64_t trained(Index k) const { return trained_[k]; }
  double loss_sum(Index k) const { return loss_sum_[k]; }
  /// L_{A_k}(t) = loss_sum / n_k; only meaningful for n_k >= 1.
  double running_loss(Index k) const {
    return loss_sum_[k] / static_cast<double>(trained_[k]);
  }
  const std::vector<std::int64_t>& counts() const { return trained_; }
  std::int64_t total_trained() const {
    std::int64_t s = 0;
    for (auto n : trained_) s += n;
    return s;
  }
  bool keeps_rounds() const { return keep_rounds_; }
  const std::vector<Round>& rounds(Index k) const { return rounds_.at(k); }

  void record(Index k, double loss, Round t) {
    ++trained_[k];
    loss_sum_[k] += loss;
    if (keep_rounds_) rounds_[k].push_back(t);
  }

 private:
  std::vector<std::int64_t> trained_;
  std::vector<double> loss_sum_;
  bool keep_rounds_ = false;
  std::vector<std::vector<Round>> rounds_;
};

/// Everything observable about one round of the protocol.
struct RoundRecord {
  Round t = 0;
  std::vector<Index> training_set;
  Index advisor = 0;
  Advice advice;
  /// ell(u^t, xi^t)
  double loss = 0.0;
  /// L(u^t) when the environment can evaluate it.
  std::optional<double> advice_expected_loss;
  /// ell_k^t(w_k^t), aligned with training_set.
  std::vector<double> expert_losses;
  /// Bounds used for the selection (empty unless recorded; nullopt = untrained).
  std::vector<std::optional<Bounds>> bounds;
};

}  // namespace mlcb
