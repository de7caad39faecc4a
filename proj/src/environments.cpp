#include "mlcb/environments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mlcb {

// -- Bernoulli bank ----------------------------------------------------------

BernoulliBankEnv::BernoulliBankEnv(std::vector<Eigen::VectorXd> means,
                                   std::string name)
    : means_(std::move(means)), name_(std::move(name)) {
  if (means_.empty()) throw ConfigError("Bernoulli bank needs K >= 1 experts");
  for (const auto& m : means_) {
    if (m.size() == 0) throw ConfigError("every expert needs at least one arm");
    if ((m.array() < 0.0).any() || (m.array() > 1.0).any())
      throw ConfigError("Bernoulli means must lie in [0,1]");
    offsets_.push_back(total_arms_);
    total_arms_ += m.size();
  }
}

Outcome BernoulliBankEnv::sample(Rng& rng, Round t) const {
  Outcome o{Eigen::VectorXd(total_arms_), t};
  for (std::size_t k = 0; k < means_.size(); ++k)
    for (Eigen::Index j = 0; j < means_[k].size(); ++j)
      o.payload(offsets_[k] + j) = uniform01(rng) < means_[k](j) ? 1.0 : 0.0;
  return o;
}

double BernoulliBankEnv::loss(const Advice& advice, const Outcome& outcome) {
  const Index k = advice.owner;
  if (k >= means_.size()) throw ConfigError("advice owner out of range");
  const auto d = means_[k].size();
  switch (advice.kind) {
    case AdviceKind::Action: {
      const auto a = static_cast<Eigen::Index>(advice.action_index());
      if (a >= d) throw ConfigError("action out of range");
      return clip(outcome.payload(offsets_[k] + a));
    }
    case AdviceKind::Distribution:
      if (advice.value.size() != d)
        throw ConfigError("distribution advice has the wrong dimension");
      return clip(advice.value.dot(outcome.payload.segment(offsets_[k], d)));
    case AdviceKind::Parameter:
      break;
  }
  throw ConfigError("Bernoulli bank accepts only action or distribution advice");
}

std::optional<double> BernoulliBankEnv::expected_loss(const Advice& advice) const {
  const Index k = advice.owner;
  if (k >= means_.size()) return std::nullopt;
  switch (advice.kind) {
    case AdviceKind::Action:
      return means_[k](static_cast<Eigen::Index>(advice.action_index()));
    case AdviceKind::Distribution:
      return advice.value.dot(means_[k]);
    case AdviceKind::Parameter:
      break;
  }
  return std::nullopt;
}

std::optional<double> BernoulliBankEnv::oracle_optimum(Index k) const {
  if (k >= means_.size()) return std::nullopt;
  return means_[k].minCoeff();
}

// -- Perturbed games -----------------------------------------------------------

Eigen::MatrixXd perturbed_game_means(std::optional<Index> game, Index experts,
                                     double eps, double gap) {
  if (experts < 1) throw ConfigError("perturbed game needs K >= 1");
  if (!(gap >= 0.0) || !(gap <= eps) || !(eps <= 1.0 / 3.0))
    throw ConfigError("perturbed game requires 0 <= gap <= eps <= 1/3");
  if (game && *game >= experts)
    throw ConfigError("perturbed game index out of range");
  Eigen::MatrixXd table(static_cast<Eigen::Index>(experts), 2);
  for (Index h = 0; h < experts; ++h) {
    const auto r = static_cast<Eigen::Index>(h);
    if (game && *game == h) {
      table(r, 0) = 0.5 - eps / 2.0;
      table(r, 1) = 0.5 - eps / 2.0 - gap;
    } else {
      table(r, 0) = 0.5 + eps / 2.0;
      table(r, 1) = 0.5 + eps / 2.0 + gap;
    }
  }
  return table;
}

BernoulliBankEnv make_perturbed_game_env(std::optional<Index> game,
                                         Index experts, double eps,
                                         double gap) {
  const Eigen::MatrixXd table = perturbed_game_means(game, experts, eps, gap);
  std::vector<Eigen::VectorXd> means;
  for (Eigen::Index r = 0; r < table.rows(); ++r)
    means.emplace_back(table.row(r).transpose());
  return BernoulliBankEnv(std::move(means), "perturbed-game");
}

// -- GLM -------------------------------------------------------------------------

Eigen::VectorXd sample_unit_sphere(Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
  for (;;) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    const double n = x.norm();
    if (n > 0.0) return x / n;
  }
}

GlmEnv::GlmEnv(GlmParams params) : params_(std::move(params)) {
  if (params_.dim < 1) throw ConfigError("GLM dimension must be >= 1");
  if (params_.links.empty()) throw ConfigError("GLM needs at least one link");
  if (params_.optimal >= params_.links.size())
    throw ConfigError("GLM optimal index out of range");
  if (params_.w.size() != static_cast<Eigen::Index>(params_.dim) ||
      !(params_.w.norm() > 0.0))
    throw ConfigError("GLM weight vector must be non-zero with length dim");
  if (!(params_.noise >= 0.0)) throw ConfigError("GLM noise must be >= 0");
  if (!(params_.radius > 0.0)) throw ConfigError("GLM radius must be > 0");
  params_.w /= params_.w.norm();

  const auto n = static_cast<Eigen::Index>(params_.eval_samples);
  eval_x_.resize(static_cast<Eigen::Index>(params_.dim), n);
  eval_r_.resize(n);
  Rng rng(params_.eval_seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    Outcome o = sample(rng, 0);
    eval_x_.col(i) = o.payload.head(static_cast<Eigen::Index>(params_.dim));
    eval_r_(i) = o.payload(static_cast<Eigen::Index>(params_.dim));
  }
}

Outcome GlmEnv::sample(Rng& rng, Round t) const {
  const auto d = static_cast<Eigen::Index>(params_.dim);
  Outcome o{Eigen::VectorXd(d + 1), t};
  o.payload.head(d) = sample_unit_sphere(params_.dim, rng);
  double r = params_.links[params_.optimal].f(params_.w.dot(o.payload.head(d)));
  if (params_.noise > 0.0) r += params_.noise * (2.0 * uniform01(rng) - 1.0);
  o.payload(d) = std::min(1.0, std::max(0.0, r));
  return o;
}

double GlmEnv::raw_loss(double prediction, double label) const {
  const double e = prediction - label;
  return params_.loss == GlmLoss::Squared ? e * e : std::abs(e);
}

double GlmEnv::loss(const Advice& advice, const Outcome& outcome) {
  if (advice.kind != AdviceKind::Parameter)
    throw ConfigError("GLM accepts only parameter advice");
  if (advice.owner >= params_.links.size())
    throw ConfigError("advice owner out of range");
  const auto d = static_cast<Eigen::Index>(params_.dim);
  const double z = advice.value.dot(outcome.payload.head(d));
  return clip(raw_loss(params_.links[advice.owner].f(z), outcome.payload(d)));
}

Eigen::VectorXd GlmEnv::loss_gradient(Index k, const Eigen::VectorXd& v,
                                      const Outcome& outcome) const {
  const auto d = static_cast<Eigen::Index>(params_.dim);
  const auto x = outcome.payload.head(d);
  const double z = v.dot(x);
  const Link& link = params_.links.at(k);
  const double e = link.f(z) - outcome.payload(d);
  const double outer = params_.loss == GlmLoss::Squared
                           ? 2.0 * e
                           : (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0));
  return outer * link.df(z) * x;
}

std::optional<double> GlmEnv::expected_loss(const Advice& advice) const {
  if (advice.kind != AdviceKind::Parameter ||
      advice.owner >= params_.links.size())
    return std::nullopt;
  const Link& link = params_.links[advice.owner];
  const Eigen::VectorXd z = eval_x_.transpose() * advice.value;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    sum += std::min(1.0, raw_loss(link.f(z(i)), eval_r_(i)));
  return sum / static_cast<double>(z.size());
}

std::optional<double> GlmEnv::oracle_optimum(Index k) const {
  if (k >= oracle_.size()) return std::nullopt;
  return oracle_[k];
}

void GlmEnv::set_oracle_table(std::vector<double> table) {
  if (table.size() != params_.links.size())
    throw ConfigError("oracle table must have one entry per expert");
  oracle_ = std::move(table);
}

OracleEstimate glm_oracle_optimum(const GlmEnv& env, Index k, Index samples,
                                  std::uint64_t seed) {
  const GlmParams& p = env.params();
  if (k >= p.links.size()) throw ConfigError("expert index out of range");
  if (samples < 2) throw ConfigError("oracle needs at least two samples");
  const auto n = static_cast<Eigen::Index>(samples);
  const auto d = static_cast<Eigen::Index>(p.dim);

  // Projections z = w'x and labels; the loss of v = c w depends on x only
  // through z.
  Eigen::VectorXd z(n);
  Eigen::VectorXd r(n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Outcome o = env.sample(rng, 0);
    z(i) = p.w.dot(o.payload.head(d));
    r(i) = o.payload(d);
  }
  const Link& link = p.links[k];
  auto objective = [&](double c) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      s += std::min(1.0, env.raw_loss(link.f(c * z(i)), r(i)));
    return s / static_cast<double>(n);
  };

  constexpr int kGrid = 120;
  const double step = 2.0 * p.radius / kGrid;
  int best = 0;
  double best_val = objective(-p.radius);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = objective(-p.radius + step * i);
    if (v < best_val) {
      best = i;
      best_val = v;
    }
  }
  if (!std::isfinite(best_val))
    throw NumericError("GLM oracle: non-finite objective for link '" +
                       link.name + "'");

  // Golden-section refinement inside the neighbouring grid cells.
  double lo = -p.radius + step * std::max(0, best - 1);
  double hi = -p.radius + step * std::min(kGrid, best + 1);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  int iter = 0;
  for (; iter < 100 && hi - lo > 1e-7; ++iter) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = objective(b);
    }
  }
  if (hi - lo > 1e-7)
    throw NumericError("GLM oracle: golden-section search did not converge for '" +
                       link.name + "' (bracket " + std::to_string(lo) + ", " +
                       std::to_string(hi) + ")");
  double c = 0.5 * (lo + hi);
  double val = objective(c);
  if (best_val < val) {
    c = -p.radius + step * best;
    val = best_val;
  }

  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::min(1.0, env.raw_loss(link.f(c * z(i)), r(i))) - val;
    sq += e * e;
  }
  const double sd = std::sqrt(sq / static_cast<double>(n - 1));
  return {val, sd / std::sqrt(static_cast<double>(n)), c};
}

// -- GLM preset --------------------------------------------------------------------

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

Link scaled_sigmoid(std::string name, double slope, double shift) {
  return {std::move(name),
          [=](double z) { return sigmoid(slope * z + shift); },
          [=](double z) {
            const double s = sigmoid(slope * z + shift);
            return slope * s * (1.0 - s);
          }};
}

/// sigmoid(6z) bent by -a * sign(z) * max(0, |z| - 0.4)^2, clipped to [0,1].
Link bent_sigmoid(std::string name, double a) {
  auto raw = [=](double z) {
    const double t = std::max(0.0, std::abs(z) - 0.4);
    return sigmoid(6.0 * z) - a * (z > 0.0 ? 1.0 : -1.0) * t * t;
  };
  return {std::move(name),
          [=](double z) { return std::clamp(raw(z), 0.0, 1.0); },
          [=](double z) {
            const double v = raw(z);
            if (v <= 0.0 || v >= 1.0) return 0.0;
            const double s = sigmoid(6.0 * z);
            const double t = std::max(0.0, std::abs(z) - 0.4);
            return 6.0 * s * (1.0 - s) - 2.0 * a * t;
          }};
}

/// clip(c0 + c1 z, 0, 1).
Link ramp(std::string name, double c0, double c1) {
  return {std::move(name),
          [=](double z) { return std::clamp(c0 + c1 * z, 0.0, 1.0); },
          [=](double z) {
            const double v = c0 + c1 * z;
            return (v <= 0.0 || v >= 1.0) ? 0.0 : c1;
          }};
}

}  // namespace

std::vector<Link> glm_appendix_a_links() {
  return {
      scaled_sigmoid("f1:sigmoid(6z-3)", 6.0, -3.0),
      scaled_sigmoid("f2:sigmoid(6z+3)", 6.0, 3.0),
      ramp("f3:ramp(0.1+z)", 0.1, 1.0),
      ramp("f4:ramp(0.9+z)", 0.9, 1.0),
      scaled_sigmoid("f5:sigmoid(3z-2)", 3.0, -2.0),
      scaled_sigmoid("f6:sigmoid(3z+2)", 3.0, 2.0),
      bent_sigmoid("f7:bent-sigmoid(2.0)", 2.0),
      bent_sigmoid("f8:bent-sigmoid(1.0)", 1.0),
      scaled_sigmoid("f9:sigmoid(6z)", 6.0, 0.0),
      ramp("f10:ramp(0.25+0.5z)", 0.25, 0.5),
  };
}

GlmParams glm_appendix_a_params(Index dim, std::uint64_t w_seed) {
  GlmParams p;
  p.dim = dim;
  Rng rng(w_seed);
  p.w = sample_unit_sphere(dim, rng);
  p.links = glm_appendix_a_links();
  p.optimal = 8;
  p.radius = 1.5;
  return p;
}

}  // namespace mlcb
