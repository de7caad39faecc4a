#pragma once

#include <cmath>
#include <cstdint>

#include "mlcb/core.hpp"

namespace mlcb {

/// Classical OGD bound constant * G * D * sqrt(n); holds deterministically.
template <typename Scalar>
Scalar ogd_regret_bound(std::int64_t n, Scalar lipschitz, Scalar diameter,
                        Scalar constant = Scalar(1.5)) {
  if (n < 0) throw ConfigError("training count must be non-negative");
  using std::sqrt;
  return constant * lipschitz * diameter * sqrt(static_cast<Scalar>(n));
}

/// Anytime high-probability bound U_k(n, delta) on an expert's internal
/// (prefix-hindsight) regret. Non-negative and non-decreasing in n.
class RegretBound {
 public:
  enum class Kind { Zero, Ogd, AnytimeUcb, Power };

  RegretBound() = default;

  static RegretBound zero() { return {}; }

  /// constant * G * D * sqrt(n), independent of delta.
  static RegretBound ogd(double lipschitz, double diameter,
                         double constant = 1.5);

  /// c * sqrt(d * n * log(n * d / delta)) for a d-armed UCB-type learner.
  static RegretBound anytime_ucb(Index arms, double constant = 8.0);

  /// beta * n^alpha * log(1/delta).
  static RegretBound power(double beta, double alpha);

  double operator()(std::int64_t n, double delta) const;

  Kind kind() const { return kind_; }
  /// Growth exponent in n.
  double alpha() const { return alpha_; }
  /// Leading constant (beta_k), recorded in run metadata.
  double beta() const { return beta_; }

 private:
  RegretBound(Kind kind, double alpha, double beta, double arms)
      : kind_(kind), alpha_(alpha), beta_(beta), arms_(arms) {}

  Kind kind_ = Kind::Zero;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double arms_ = 0.0;
};

}  // namespace mlcb
