#pragma once

// Reference procedures sharing the Runner protocol with M-LCB.

#include <optional>
#include <vector>

#include "mlcb/meta.hpp"

namespace mlcb {

/// S_t = {((t-1)M + j) mod K : j < M}, sorted; advisor is (t-1)M mod K.
Selection round_robin_select(Round t, Index experts, Index m);

class RoundRobinProcedure final : public Procedure {
 public:
  RoundRobinProcedure(Index experts, Index m);
  std::string name() const override { return "round-robin"; }
  Selection select(Round t, const ExpertLedger& ledger) override;

 private:
  Index experts_;
  Index m_;
};

/// Exponential weights under limited advice: the advisor is drawn from the
/// weights, M-1 more experts uniformly from the rest, and every observed
/// loss is importance weighted by its inclusion probability.
class LimitedAdviceProcedure final : public Procedure {
 public:
  LimitedAdviceProcedure(Index experts, Index m, std::uint64_t seed,
                         double gamma = 0.0);
  std::string name() const override { return "limited-advice"; }
  Selection select(Round t, const ExpertLedger& ledger) override;
  void observe(Round t, const Selection& selection,
               std::span<const double> losses) override;

  const Eigen::VectorXd& weights() const { return w_; }
  /// Probability that expert k lands in S_t given sampling distribution p.
  static double inclusion_probability(double p_k, Index experts, Index m);
  /// Learning rate sqrt(M ln K / (K t)).
  static double learning_rate(Round t, Index experts, Index m);

 private:
  Index experts_;
  Index m_;
  double gamma_;
  Eigen::VectorXd w_;
  Eigen::VectorXd p_;
  Rng rng_;
};

/// Trains the M experts with the smallest L_k^* and follows the best one.
class OracleProcedure final : public Procedure {
 public:
  OracleProcedure(std::optional<std::vector<double>> oracle, Index m);
  std::string name() const override { return "oracle"; }
  Selection select(Round t, const ExpertLedger& ledger) override;

 private:
  Selection fixed_;
};

}  // namespace mlcb
