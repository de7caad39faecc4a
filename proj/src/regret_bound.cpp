#include "mlcb/regret_bound.hpp"

#include <cmath>

namespace mlcb {

RegretBound RegretBound::ogd(double lipschitz, double diameter,
                             double constant) {
  if (!(lipschitz > 0.0) || !(diameter > 0.0) || !(constant > 0.0))
    throw ConfigError("OGD bound needs G > 0, D > 0 and a positive constant");
  return {Kind::Ogd, 0.5, constant * lipschitz * diameter, 0.0};
}

RegretBound RegretBound::anytime_ucb(Index arms, double constant) {
  if (arms < 1 || !(constant > 0.0))
    throw ConfigError("UCB bound needs d >= 1 arms and a positive constant");
  const double d = static_cast<double>(arms);
  return {Kind::AnytimeUcb, 0.5, constant * std::sqrt(d), d};
}

RegretBound RegretBound::power(double beta, double alpha) {
  if (!(beta >= 0.0) || !(alpha > 0.0) || alpha > 1.0)
    throw ConfigError("power bound needs beta >= 0 and alpha in (0, 1]");
  return {Kind::Power, alpha, beta, 0.0};
}

double RegretBound::operator()(std::int64_t n, double delta) const {
  if (n < 0) throw ConfigError("training count must be non-negative");
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Ogd:
      return beta_ * std::sqrt(nd);
    case Kind::AnytimeUcb:
      // beta_ = c * sqrt(d)
      return beta_ * std::sqrt(nd * std::log(nd * arms_ / delta));
    case Kind::Power:
      return beta_ * std::pow(nd, alpha_) * std::log(1.0 / delta);
  }
  return 0.0;
}

}  // namespace mlcb
