#include "mlcb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mlcb {

Selection round_robin_select(Round t, Index experts, Index m) {
  if (t < 1) throw ConfigError("rounds start at 1");
  if (m < 1 || m > experts) throw ConfigError("M must satisfy 1 <= M <= K");
  Selection s;
  const auto base = static_cast<Index>((static_cast<std::uint64_t>(t - 1) * m) % experts);
  for (Index j = 0; j < m; ++j) s.training_set.push_back((base + j) % experts);
  s.advisor = base;
  std::sort(s.training_set.begin(), s.training_set.end());
  return s;
}

RoundRobinProcedure::RoundRobinProcedure(Index experts, Index m)
    : experts_(experts), m_(m) {
  if (m < 1 || m > experts) throw ConfigError("M must satisfy 1 <= M <= K");
}

Selection RoundRobinProcedure::select(Round t, const ExpertLedger&) {
  return round_robin_select(t, experts_, m_);
}

// ---------------------------------------------------------------------------

LimitedAdviceProcedure::LimitedAdviceProcedure(Index experts, Index m,
                                               std::uint64_t seed, double gamma)
    : experts_(experts),
      m_(m),
      gamma_(gamma),
      w_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(experts),
                                   1.0 / static_cast<double>(experts))),
      p_(w_),
      rng_(spawn_rng(seed, Stream::Procedure)) {
  if (m < 1 || m > experts) throw ConfigError("M must satisfy 1 <= M <= K");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma in [0,1]");
}

double LimitedAdviceProcedure::inclusion_probability(double p_k, Index experts,
                                                     Index m) {
  if (experts == 1) return 1.0;
  return p_k + (1.0 - p_k) * static_cast<double>(m - 1) /
                   static_cast<double>(experts - 1);
}

double LimitedAdviceProcedure::learning_rate(Round t, Index experts, Index m) {
  const double k = static_cast<double>(experts);
  if (experts == 1) return 0.0;
  return std::sqrt(static_cast<double>(m) * std::log(k) /
                   (k * static_cast<double>(t)));
}

Selection LimitedAdviceProcedure::select(Round, const ExpertLedger&) {
  const double k = static_cast<double>(experts_);
  p_ = (1.0 - gamma_) * w_.array() + gamma_ / k;
  Selection s;
  s.advisor = sample_index(p_, rng_);
  std::vector<Index> rest;
  rest.reserve(experts_ - 1);
  for (Index j = 0; j < experts_; ++j)
    if (j != s.advisor) rest.push_back(j);
  // Partial Fisher-Yates with the portable uniform.
  for (Index j = 0; j + 1 < m_; ++j) {
    const auto span = rest.size() - j;
    const auto pick = j + std::min<std::size_t>(
                              span - 1, static_cast<std::size_t>(uniform01(rng_) *
                                                                 static_cast<double>(span)));
    std::swap(rest[j], rest[pick]);
  }
  s.training_set.assign(rest.begin(), rest.begin() + static_cast<long>(m_ - 1));
  s.training_set.push_back(s.advisor);
  std::sort(s.training_set.begin(), s.training_set.end());
  return s;
}

void LimitedAdviceProcedure::observe(Round t, const Selection& selection,
                                     std::span<const double> losses) {
  const double eta = learning_rate(t, experts_, m_);
  for (std::size_t i = 0; i < selection.training_set.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(selection.training_set[i]);
    const double q = inclusion_probability(p_(k), experts_, m_);
    w_(k) *= std::exp(-eta * losses[i] / q);
  }
  const double total = w_.sum();
  if (!(total > 1e-12)) throw NumericError("weights collapsed");
  w_ /= total;
}

// ---------------------------------------------------------------------------

OracleProcedure::OracleProcedure(std::optional<std::vector<double>> oracle,
                                 Index m) {
  if (!oracle) throw ConfigError("oracle baseline requires analytic environment");
  const Index k = oracle->size();
  if (m < 1 || m > k) throw ConfigError("M must satisfy 1 <= M <= K");
  std::vector<Index> order(k);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return (*oracle)[a] < (*oracle)[b]; });
  fixed_.advisor = order.front();
  fixed_.training_set.assign(order.begin(), order.begin() + static_cast<long>(m));
  std::sort(fixed_.training_set.begin(), fixed_.training_set.end());
}

Selection OracleProcedure::select(Round, const ExpertLedger&) { return fixed_; }

}  // namespace mlcb
