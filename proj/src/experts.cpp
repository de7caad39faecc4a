#include "mlcb/experts.hpp"

#include <cmath>

namespace mlcb {

void ExpertHistory::append(HistoryEntry entry, Eigen::VectorXd advice_snapshot) {
  if (advice_sum_.size() == 0) {
    advice_sum_ = advice_snapshot;
  } else {
    advice_sum_ += advice_snapshot;
  }
  loss_sum_ += entry.loss;
  entries_.push_back(std::move(entry));
  snapshots_.push_back(std::move(advice_snapshot));
}

Eigen::VectorXd safe_advice_value(const ExpertHistory& history, Wrapper wrapper,
                                  Rng& rng) {
  if (history.empty())
    throw ConfigError("untrained expert queried for advice");
  if (wrapper == Wrapper::Averaging)
    return history.advice_sum() / static_cast<double>(history.size());
  const auto n = history.size();
  auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  if (pick >= n) pick = n - 1;
  return history.advice_snapshots()[pick];
}

double StepSchedule::at(std::int64_t t) const {
  if (t < 1) throw ConfigError("step index starts at 1");
  switch (kind) {
    case Kind::Constant:
      return eta0;
    case Kind::InverseSqrt:
      return eta0 / std::sqrt(static_cast<double>(t));
  }
  return eta0;
}

void ExpertSpec::validate() const {
  std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, OgdRule>) {
          if (!(r.steps.eta0 > 0.0))
            throw ConfigError("OGD step sizes must be positive");
          if (!(r.radius > 0.0)) throw ConfigError("OGD radius must be > 0");
          if (!(r.lipschitz > 0.0))
            throw ConfigError("OGD Lipschitz constant must be > 0");
          if (r.initial.size() == 0)
            throw ConfigError("OGD expert needs an initial parameter");
          if (r.initial.norm() > r.radius * (1.0 + 1e-12))
            throw ConfigError("OGD initial parameter outside the radius-R ball");
        } else if constexpr (std::is_same_v<R, Ucb1Rule>) {
          if (r.arms < 1) throw ConfigError("bandit expert needs d >= 1 arms");
          if (!(r.bound_constant > 0.0))
            throw ConfigError("bandit bound constant must be > 0");
        } else {
          if (r.value.size() == 0)
            throw ConfigError("static expert needs an advice value");
          if (r.kind == AdviceKind::Distribution && !on_simplex(r.value))
            throw ConfigError("static distribution advice must be on the simplex");
        }
      },
      rule);
}

Eigen::VectorXd ogd_step(const Eigen::VectorXd& w, const Eigen::VectorXd& grad,
                         double eta, double radius) {
  if (!grad.allFinite()) throw NumericError("diverged expert");
  Eigen::VectorXd next = w - eta * grad;
  const double norm = next.norm();
  if (norm > radius) next *= radius / norm;
  return next;
}

// ---------------------------------------------------------------------------

Expert::Expert(Index id, ExpertState initial, RegretBound bound,
               Wrapper wrapper, Rng wrapper_rng)
    : id_(id),
      state_(std::move(initial)),
      bound_(bound),
      wrapper_(wrapper),
      wrapper_rng_(std::move(wrapper_rng)) {}

Advice Expert::safe_advice() {
  return {advice_kind(), id_,
          safe_advice_value(history_, wrapper_, wrapper_rng_)};
}

Eigen::VectorXd Expert::advice_snapshot(const Realized& /*r*/) const {
  return advice().value;
}

double Expert::train(const Outcome& outcome, Environment& env) {
  const Realized r = realize(outcome, env);
  history_.append({state_.w, r.loss, r.action}, advice_snapshot(r));
  Eigen::VectorXd next = next_state(outcome, env);
  if (!next.allFinite()) throw NumericError("diverged expert");
  state_.w = std::move(next);
  ++state_.version;
  return r.loss;
}

// ---------------------------------------------------------------------------

OgdExpert::OgdExpert(Index id, OgdRule rule, RegretBound bound,
                     Wrapper wrapper, Rng wrapper_rng)
    : Expert(id, {rule.initial, 0}, bound, wrapper, std::move(wrapper_rng)),
      rule_(std::move(rule)) {}

Advice OgdExpert::advice() const {
  return Advice::parameter(id(), current().w);
}

Expert::Realized OgdExpert::realize(const Outcome& outcome, Environment& env) {
  return {env.loss(advice(), outcome), std::nullopt};
}

Eigen::VectorXd OgdExpert::next_state(const Outcome& outcome,
                                      const Environment& env) {
  const auto& w = current().w;
  const Eigen::VectorXd grad = env.loss_gradient(id(), w, outcome);
  return ogd_step(w, grad, rule_.steps.at(current().version + 1), rule_.radius);
}

// ---------------------------------------------------------------------------

namespace {
Eigen::VectorXd one_hot(Index size, Index at) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  v(static_cast<Eigen::Index>(at)) = 1.0;
  return v;
}
}  // namespace

Ucb1Expert::Ucb1Expert(Index id, Ucb1Rule rule, RegretBound bound,
                       Wrapper wrapper, Rng wrapper_rng, Rng sampling_rng)
    : Expert(id, {one_hot(rule.arms, 0), 0}, bound, wrapper,
             std::move(wrapper_rng)),
      rule_(rule),
      sampling_rng_(std::move(sampling_rng)),
      plays_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rule.arms))),
      loss_sums_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rule.arms))) {}

Advice Ucb1Expert::advice() const {
  return Advice::distribution(id(), current().w);
}

Expert::Realized Ucb1Expert::realize(const Outcome& outcome, Environment& env) {
  const Index a = sample_index(current().w, sampling_rng_);
  return {env.loss(Advice::action(id(), a), outcome), a};
}

Eigen::VectorXd Ucb1Expert::advice_snapshot(const Realized& r) const {
  if (rule_.advice_mode == BanditAdvice::EmpiricalMarginal && r.action)
    return one_hot(rule_.arms, *r.action);
  return current().w;
}

Eigen::VectorXd Ucb1Expert::next_state(const Outcome& /*outcome*/,
                                       const Environment& /*env*/) {
  const HistoryEntry& last = history().entries().back();
  const auto a = static_cast<Eigen::Index>(*last.action);
  plays_(a) += 1.0;
  loss_sums_(a) += last.loss;

  for (Eigen::Index j = 0; j < plays_.size(); ++j)
    if (plays_(j) == 0.0) return one_hot(rule_.arms, static_cast<Index>(j));

  const double log_n = std::log(plays_.sum());
  Eigen::Index best = 0;
  double best_index = 0.0;
  for (Eigen::Index j = 0; j < plays_.size(); ++j) {
    const double idx =
        loss_sums_(j) / plays_(j) - std::sqrt(2.0 * log_n / plays_(j));
    if (j == 0 || idx < best_index) {
      best = j;
      best_index = idx;
    }
  }
  return one_hot(rule_.arms, static_cast<Index>(best));
}

// ---------------------------------------------------------------------------

StaticExpert::StaticExpert(Index id, StaticRule rule, Wrapper wrapper,
                           Rng wrapper_rng)
    : Expert(id, {rule.value, 0}, RegretBound::zero(), wrapper,
             std::move(wrapper_rng)),
      rule_(std::move(rule)) {}

Advice StaticExpert::advice() const {
  return {rule_.kind, id(), rule_.value};
}

Expert::Realized StaticExpert::realize(const Outcome& outcome,
                                       Environment& env) {
  return {env.loss(advice(), outcome), std::nullopt};
}

Eigen::VectorXd StaticExpert::next_state(const Outcome& /*outcome*/,
                                         const Environment& /*env*/) {
  return current().w;
}

// ---------------------------------------------------------------------------

RegretBound regret_bound_for(const ExpertSpec& spec) {
  if (spec.bound) return *spec.bound;
  return std::visit(
      [](const auto& r) -> RegretBound {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, OgdRule>) {
          return RegretBound::ogd(r.lipschitz, 2.0 * r.radius, r.bound_constant);
        } else if constexpr (std::is_same_v<R, Ucb1Rule>) {
          return RegretBound::anytime_ucb(r.arms, r.bound_constant);
        } else {
          return RegretBound::zero();
        }
      },
      spec.rule);
}

std::unique_ptr<Expert> make_expert(Index id, const ExpertSpec& spec,
                                    std::uint64_t master_seed) {
  spec.validate();
  Rng wrapper_rng = spawn_rng(master_seed, Stream::WrapperSampling, id);
  const RegretBound bound = regret_bound_for(spec);
  return std::visit(
      [&](const auto& r) -> std::unique_ptr<Expert> {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, OgdRule>) {
          return std::make_unique<OgdExpert>(id, r, bound, spec.wrapper,
                                             std::move(wrapper_rng));
        } else if constexpr (std::is_same_v<R, Ucb1Rule>) {
          return std::make_unique<Ucb1Expert>(
              id, r, bound, spec.wrapper, std::move(wrapper_rng),
              spawn_rng(master_seed, Stream::ExpertSampling, id));
        } else {
          return std::make_unique<StaticExpert>(id, r, spec.wrapper,
                                                std::move(wrapper_rng));
        }
      },
      spec.rule);
}

}  // namespace mlcb
