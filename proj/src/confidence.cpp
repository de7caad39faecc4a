#include "mlcb/confidence.hpp"

#include <algorithm>
#include <cmath>

namespace mlcb {

void ConfidenceConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta in (0,1)");
  if (experts < 1) throw ConfigError("confidence needs K >= 1");
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw ConfigError("scale must be a finite non-negative number");
  if (delta_n_override && !(*delta_n_override > 0.0 && *delta_n_override <= 1.0))
    throw ConfigError("delta_n override must lie in (0,1]");
}

Bounds standard_bounds(double running_loss, std::int64_t n,
                       const RegretBound& u_k, const ConfidenceConfig& cfg) {
  if (n < 1) throw ConfigError("untrained expert has no bounds");
  const double dn = cfg.delta_n(n);
  const double lower_slack =
      u_k(n, cfg.delta_arm()) / static_cast<double>(n) + g_term(n, dn);
  const double upper_slack = h_term(n, dn);
  return {running_loss - cfg.scale * lower_slack,
          running_loss + cfg.scale * upper_slack};
}

Bounds standard_tight_bounds(double running_loss, std::int64_t n,
                             const RegretBound& u_k,
                             const ConfidenceConfig& cfg) {
  if (n < 1) throw ConfigError("untrained expert has no bounds");
  const double nd = static_cast<double>(n);
  const double dn = cfg.delta_n(n);
  const double l = std::log(1.0 / dn);
  const double ucb = running_loss + cfg.scale * h_term(n, dn);
  const double z = std::min(1.0, std::max(0.0, ucb));
  const double g_tight = std::sqrt(2.0 * z * l / (3.0 * nd)) + 2.0 * l / nd;
  const double lower_slack = u_k(n, cfg.delta_arm()) / nd + g_tight;
  return {running_loss - cfg.scale * lower_slack, ucb};
}

Bounds self_normalized_bounds(double running_loss, std::int64_t n,
                              const RegretBound& u_k,
                              const ConfidenceConfig& cfg) {
  if (n < 1) throw ConfigError("untrained expert has no bounds");
  const double x = cfg.self_normalized_x();
  const double loss = std::min(1.0, std::max(0.0, running_loss));
  const double lcb =
      self_normalized_lcb(loss, n, u_k(n, cfg.delta_arm()), x);
  const double ucb = self_normalized_ucb(loss, n, x);
  return {running_loss - cfg.scale * (loss - lcb),
          running_loss + cfg.scale * (ucb - loss)};
}

Bounds compute_bounds(double running_loss, std::int64_t n,
                      const RegretBound& u_k, const ConfidenceConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::Standard:
      return standard_bounds(running_loss, n, u_k, cfg);
    case Scheme::StandardTight:
      return standard_tight_bounds(running_loss, n, u_k, cfg);
    case Scheme::SelfNormalized:
      return self_normalized_bounds(running_loss, n, u_k, cfg);
  }
  return standard_bounds(running_loss, n, u_k, cfg);
}

double interval_width(std::int64_t n, const RegretBound& u_k,
                      const ConfidenceConfig& cfg) {
  if (n < 1) throw ConfigError("no observations");
  const double dn = cfg.delta_n(n);
  return cfg.scale * (h_term(n, dn) + g_term(n, dn) +
                      u_k(n, cfg.delta_arm()) / static_cast<double>(n));
}

}  // namespace mlcb
