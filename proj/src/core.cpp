#include "mlcb/core.hpp"

#include <cmath>

namespace mlcb {

bool on_simplex(const Eigen::Ref<const Eigen::VectorXd>& p, double tol) {
  if (p.size() == 0) return false;
  if ((p.array() < -tol).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

double clip_loss(double raw) {
  if (!std::isfinite(raw)) throw NumericError("non-finite loss");
  return std::min(1.0, std::max(0.0, raw));
}

Rng spawn_rng(std::uint64_t master_seed, Stream stream, std::uint64_t sub) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(sub),
                    static_cast<std::uint32_t>(sub >> 32)};
  return Rng(seq);
}

Index sample_index(const Eigen::Ref<const Eigen::VectorXd>& p, Rng& rng) {
  const double u = uniform01(rng) * p.sum();
  double acc = 0.0;
  Index last_positive = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    acc += p(i);
    last_positive = static_cast<Index>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

Eigen::VectorXd Environment::loss_gradient(Index /*k*/,
                                           const Eigen::VectorXd& /*w*/,
                                           const Outcome& /*outcome*/) const {
  throw ConfigError("environment '" + name() +
                    "' provides no gradient oracle");
}

}  // namespace mlcb
