#pragma once

// Confidence brackets [LCB_k, UCB_k] around an expert's optimal expected
// loss L_k^*. Natural logarithms throughout.
//
// Convention: the bounds used at round t are built from the history through
// round t-1, i.e. from the n_k training sessions completed so far. They are
// never queried at n = 0; the meta layer handles cold starts itself.

#include <cmath>
#include <cstdint>
#include <optional>

#include "mlcb/core.hpp"
#include "mlcb/regret_bound.hpp"

namespace mlcb {

enum class Scheme {
  Standard,        // Hoeffding/Azuma-type G and H terms
  StandardTight,   // G refined with Z_k = min(1, UCB_k) for bounded losses
  SelfNormalized,  // Freedman / self-normalized variants
};

struct ConfidenceConfig {
  double delta = 0.1;
  Index experts = 1;
  Scheme scheme = Scheme::Standard;
  /// Multiplier applied to the whole slack on each side of the bracket.
  double scale = 1.0;
  /// Test hook: replaces delta_n(n) by a fixed value when set.
  std::optional<double> delta_n_override;

  double delta_arm() const { return delta / (2.0 * static_cast<double>(experts)); }
  double delta_n(std::int64_t n) const {
    if (delta_n_override) return *delta_n_override;
    const double nd = static_cast<double>(n);
    return delta / (7.0 * static_cast<double>(experts) * nd * nd);
  }
  /// ln(1/delta') used by the self-normalized scheme; delta' = delta/(4K)
  /// leaves delta/2 for the K inner-regret events at delta_arm.
  double self_normalized_x() const {
    return std::log(4.0 * static_cast<double>(experts) / delta);
  }

  void validate() const;
};

inline void require_observations(std::int64_t n) {
  if (n < 1) throw ConfigError("no observations");
}

/// G(n, delta) = sqrt(2 ln(1/delta) / n) + 2 ln(1/delta) / (3n).
template <typename Scalar>
Scalar g_term(std::int64_t n, Scalar delta) {
  require_observations(n);
  using std::log;
  using std::sqrt;
  const Scalar nd = static_cast<Scalar>(n);
  const Scalar l = log(Scalar(1) / delta);
  return sqrt(Scalar(2) * l / nd) + Scalar(2) * l / (Scalar(3) * nd);
}

/// H(n, delta) = sqrt(2 ln(1/delta) / n).
template <typename Scalar>
Scalar h_term(std::int64_t n, Scalar delta) {
  require_observations(n);
  using std::log;
  using std::sqrt;
  return sqrt(Scalar(2) * log(Scalar(1) / delta) / static_cast<Scalar>(n));
}

/// x_n = x - 2/3 + 2 ln(1 + ln n), with x = ln(1/delta). The count may be
/// real-valued (n >= 1).
template <typename Scalar, typename Count>
Scalar xn_term(Scalar x, Count n) {
  if (!(n >= Count(1))) throw ConfigError("no observations");
  using std::log;
  return x - Scalar(2) / Scalar(3) +
         Scalar(2) * log(Scalar(1) + log(static_cast<Scalar>(n)));
}

/// Freedman-type lower bound:
/// L - sqrt(3 g L) - g - u/n with g = 2 x_n / (3n).
template <typename Scalar>
Scalar self_normalized_lcb(Scalar running_loss, std::int64_t n,
                           Scalar regret_bound_value, Scalar x) {
  require_observations(n);
  using std::sqrt;
  const Scalar nd = static_cast<Scalar>(n);
  const Scalar g = Scalar(2) * xn_term(x, n) / (Scalar(3) * nd);
  return running_loss - sqrt(Scalar(3) * g * running_loss) - g -
         regret_bound_value / nd;
}

/// Self-normalized upper bound with S = n L:
/// L + 9x/(2n) (6 + ln x + ln(1+4S)) + sqrt(2x (1+4S)(1 + ln(1+4S)/2)) / n.
template <typename Scalar>
Scalar self_normalized_ucb(Scalar running_loss, std::int64_t n, Scalar x) {
  require_observations(n);
  using std::log;
  using std::sqrt;
  const Scalar nd = static_cast<Scalar>(n);
  const Scalar v = Scalar(1) + Scalar(4) * nd * running_loss;
  const Scalar lv = log(v);
  return running_loss +
         Scalar(9) * x / (Scalar(2) * nd) * (Scalar(6) + log(x) + lv) +
         sqrt(Scalar(2) * x * v * (Scalar(1) + lv / Scalar(2))) / nd;
}

struct Bounds {
  double lcb = 0.0;
  double ucb = 0.0;
  double width() const { return ucb - lcb; }
};

/// LCB = L - U_k(n, delta_arm)/n - G(n, delta_n), UCB = L + H(n, delta_n).
Bounds standard_bounds(double running_loss, std::int64_t n,
                       const RegretBound& u_k, const ConfidenceConfig& cfg);

/// Bounded-loss refinement: G replaced by
/// sqrt(2 Z ln(1/delta_n) / (3n)) + 2 ln(1/delta_n)/n, Z = min(1, UCB).
Bounds standard_tight_bounds(double running_loss, std::int64_t n,
                             const RegretBound& u_k,
                             const ConfidenceConfig& cfg);

Bounds self_normalized_bounds(double running_loss, std::int64_t n,
                              const RegretBound& u_k,
                              const ConfidenceConfig& cfg);

/// Dispatches on cfg.scheme.
Bounds compute_bounds(double running_loss, std::int64_t n,
                      const RegretBound& u_k, const ConfidenceConfig& cfg);

/// Standard-scheme width H + G + U_k/n (times scale); depends on n only.
double interval_width(std::int64_t n, const RegretBound& u_k,
                      const ConfidenceConfig& cfg);

}  // namespace mlcb
