// One PASS/FAIL line per primary acceptance criterion. Exit status is nonzero
// when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mlcb/harness/experiment.hpp"

using namespace mlcb;
using namespace mlcb::harness;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and thresholds.
constexpr double kFormulaTol = 1e-12;
constexpr double kFormulaSeconds = 1.0;
constexpr int kSelectionTrials = 10000;
constexpr double kSelectionSeconds = 10.0;
constexpr double kCoverageMaxRate = 0.1;
constexpr int kCoverageRuns = 200;
constexpr Round kCoverageT = 10000;
constexpr double kSlopeMax = 0.65;
constexpr int kRateSeeds = 30;
constexpr Round kRateT = 100000;
constexpr double kMonotoneRatio = 1.3;
constexpr double kGlmModeShare = 0.8;
constexpr double kGlmTop3Share = 0.5;
constexpr double kRoundRobinRelTol = 0.05;
constexpr int kGlmSeeds = 30;
constexpr int kGapSeeds = 100;
constexpr Round kGapT = 10000;
constexpr double kGapMax = 30.0;
constexpr double kTopmIncrementTol = 1e-12;
constexpr std::uint64_t kMinAuditedRounds = 1000000;

struct Line {
  std::string name;
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// -- per-round invariant audit, independent of the runner's own audit ----------

struct InvariantAudit {
  std::uint64_t rounds = 0;
  std::uint64_t violations = 0;
  std::uint64_t topm_rounds = 0;
  double min_topm_increment = 0.0;
};

RunResult run_audited(const ExperimentConfig& cfg, const Scenario& sc, const CellKey& key,
                      InvariantAudit& audit) {
  auto env = sc.make_env();
  std::vector<std::unique_ptr<Expert>> experts;
  for (Index k = 0; k < sc.experts; ++k)
    experts.push_back(make_expert(k, sc.expert_specs[k], key.seed));
  const bool is_mlcb = key.procedure == "m-lcb";
  RunnerOptions ro;
  ro.budget = key.m;
  ro.seed = key.seed;
  ro.record_bounds = is_mlcb;
  Runner runner(*env, std::move(experts), make_procedure(cfg, sc, key), ro);

  HorizonOptions ho;
  ho.horizon = cfg.horizon;
  ho.checkpoints = checkpoint_schedule(cfg.horizon, CheckpointMode::Compact, cfg.per_decade);
  ho.final_window_start = cfg.horizon - cfg.horizon / 10;
  ho.oracle = sc.oracle;
  if (is_mlcb && cfg.scheme == Scheme::Standard) {
    RegretAccumulator::BudgetContext bc;
    bc.cfg.delta = cfg.delta;
    bc.cfg.experts = sc.experts;
    bc.cfg.scale = cfg.scale;
    for (const auto& s : sc.expert_specs) bc.bounds.push_back(regret_bound_for(s));
    ho.budget = std::move(bc);
  }
  std::vector<std::int64_t> prev(sc.experts, 0);
  std::int64_t selected = 0;
  const Index m = key.m;
  const auto oracle = sc.oracle;
  ho.sink = [&](const RoundRecord& rec, const ExpertLedger& ledger, const RegretAccumulator&) {
    ++audit.rounds;
    const auto& s = rec.training_set;
    bool ok = !s.empty() && s.size() <= m &&
              std::find(s.begin(), s.end(), rec.advisor) != s.end();
    for (Index k = 0; k < ledger.size(); ++k) {
      const bool in = std::find(s.begin(), s.end(), k) != s.end();
      ok = ok && ledger.trained(k) - prev[k] == (in ? 1 : 0);
      prev[k] = ledger.trained(k);
    }
    selected += static_cast<std::int64_t>(s.size());
    ok = ok && ledger.total_trained() == selected;
    if (!ok) ++audit.violations;
    if (oracle && s.size() == m) {
      const double inc = topm_regret_increment(s, *oracle, m);
      if (audit.topm_rounds == 0 || inc < audit.min_topm_increment)
        audit.min_topm_increment = inc;
      ++audit.topm_rounds;
    }
  };
  RunResult r = run_horizon(runner, std::move(ho));
  if (r.error) throw std::runtime_error("cell " + key.id() + " failed: " + *r.error);
  return r;
}

// Mean of a per-checkpoint series over runs sharing one schedule.
std::vector<double> mean_series(const std::vector<RunResult>& runs,
                                std::vector<double> RegretTrace::*series) {
  std::vector<double> mean(runs.front().trace.checkpoints.size(), 0.0);
  for (const auto& r : runs)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (r.trace.*series)[i];
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return mean;
}

std::vector<double> as_double(const std::vector<Round>& t) {
  return {t.begin(), t.end()};
}

// -- 1. formulas ------------------------------------------------------------------

Line formula_suite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  auto check = [&](double got, long double want) {
    worst = std::max(worst, static_cast<double>(std::fabs(static_cast<long double>(got) - want)));
  };
  const long double e = std::exp(1.0L);
  check(g_term(5, 1.0), 0.0L);
  check(g_term(2, std::exp(-2.0)), std::sqrt(2.0L) + 2.0L / 3.0L);
  check(g_term(18, std::exp(-1.0)), 1.0L / 3.0L + 1.0L / 27.0L);
  check(h_term(8, std::exp(-1.0)), 0.5L);
  check(h_term(1, 1.0), 0.0L);
  check(h_term(2, std::exp(-1.0)), 1.0L);
  {
    ConfidenceConfig c;
    c.delta = 0.7;
    c.experts = 10;
    check(c.delta_n(1), 0.01L);
    c.delta = 0.1;
    c.experts = 5;
    check(c.delta_arm(), 0.01L);
  }
  check(xn_term(1.0, 1), 1.0L / 3.0L);
  check(xn_term(2.0 / 3.0, 1), 0.0L);
  check(xn_term(1.0, static_cast<double>(e)), 1.0L / 3.0L + 2.0L * std::log(2.0L));
  {
    const long double g = 2.0L * (1.0L / 3.0L + 2.0L * std::log(1.0L + std::log(10.0L))) / 30.0L;
    check(self_normalized_lcb(0.0, 10, 2.0, 1.0), -g - 0.2L);
    check(self_normalized_lcb(0.3, 10, 10.0, 1.0) - self_normalized_lcb(0.3, 10, 0.0, 1.0),
          -1.0L);
  }
  check(self_normalized_lcb(0.48, 100, 0.0, 1.0), 0.26428321358913228796L);
  check(self_normalized_ucb(0.0, 1, 1.0), 27.0L + std::sqrt(2.0L));
  check(self_normalized_ucb(0.5, 10, 1.0), 5.5992822548156380716L);
  {
    ConfidenceConfig c;
    c.delta_n_override = std::exp(-2.0);
    check(interval_width(2, RegretBound::zero(), c), 3.49509379141285676427L);
    c.delta_n_override = 1.0;
    check(interval_width(7, RegretBound::zero(), c), 0.0L);
  }
  // width == ucb - lcb on a randomized U_k grid
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> beta(0.0, 5.0), alpha(0.1, 1.0), loss(0.0, 1.0),
      delta(0.01, 0.5);
  double worst_width = 0.0;
  for (int g = 0; g < 4; ++g) {
    const RegretBound u = g == 3 ? RegretBound::anytime_ucb(2, 8.0)
                                 : RegretBound::power(beta(rng), alpha(rng));
    ConfidenceConfig c;
    c.delta = delta(rng);
    c.experts = 1 + static_cast<Index>(rng() % 10);
    for (std::int64_t n = 1; n <= 10000; ++n) {
      const Bounds b = standard_bounds(loss(rng), n, u, c);
      worst_width = std::max(worst_width, std::fabs(interval_width(n, u, c) - (b.ucb - b.lcb)));
    }
  }
  const double secs = seconds_since(t0);
  Line l{"formula suite", worst <= kFormulaTol && worst_width <= kFormulaTol &&
                              secs < kFormulaSeconds,
         ""};
  l.detail = fmt("max hand-value error %.3g, max |width-(ucb-lcb)| %.3g, %.3f s", worst,
                 worst_width, secs);
  return l;
}

// -- 3. selection oracle -------------------------------------------------------------

Line selection_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  const double grid[] = {-0.5, -0.25, 0.0, 0.25, 0.5, 0.75};
  constexpr double kUntrained = -1e6;
  int mismatches = 0;
  for (int trial = 0; trial < kSelectionTrials; ++trial) {
    const Index k = 1 + rng() % 8;
    const Index m = 1 + rng() % k;
    std::vector<std::optional<double>> lcbs(k);
    std::vector<double> val(k);
    for (Index i = 0; i < k; ++i) {
      if (rng() % 6 == 0) {
        val[i] = kUntrained;
      } else {
        val[i] = grid[rng() % 6];
        lcbs[i] = val[i];
      }
    }
    // Exhaustive: minimal sum over all M-subsets, lexicographically first on ties.
    std::vector<Index> best;
    double best_sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      if (static_cast<Index>(__builtin_popcount(mask)) != m) continue;
      std::vector<Index> s;
      double sum = 0.0;
      for (Index i = 0; i < k; ++i)
        if (mask & (1u << i)) {
          s.push_back(i);
          sum += val[i];
        }
      if (best.empty() || sum < best_sum || (sum == best_sum && s < best)) {
        best = s;
        best_sum = sum;
      }
    }
    if (select_training_set(lcbs, m) != best) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {"selection optimality oracle", mismatches == 0 && secs < kSelectionSeconds,
          std::to_string(mismatches) + " mismatches in " + std::to_string(kSelectionTrials) +
              " trials, " + fmt("%.2f s", secs)};
}

// -- bank experiments -----------------------------------------------------------------

Json bank_doc(const std::string& name, Round T) {
  Json d;
  d["name"] = name;
  d["environment"] = {{"preset", "bernoulli-bank"}};
  d["experts"] = {{"bound_constant", 8}};
  d["T"] = T;
  d["delta"] = 0.1;
  d["procedures"] = {"m-lcb"};
  d["confidence"] = {{"scheme", "standard"}, {"scale", 1.0}};
  d["output"] = {{"dir", "unused"}};
  return d;
}

struct CoverageOutcome {
  Line coverage, pseudo;
};

CoverageOutcome coverage_and_budget(InvariantAudit& audit) {
  const auto t0 = Clock::now();
  Json d = bank_doc("coverage", kCoverageT);
  d["environment"]["params"]["means"] = {
      {0.2, 0.5}, {0.3, 0.4}, {0.45, 0.55}, {0.6, 0.7}, {0.8, 0.9}};
  d["M"] = 2;
  const ExperimentConfig cfg = parse_config(d);
  const Scenario sc = build_scenario(cfg);
  int failed_runs = 0, clean = 0, exceed = 0;
  std::uint64_t checks = 0;
  for (int s = 1; s <= kCoverageRuns; ++s) {
    const RunResult r = run_audited(cfg, sc, {"m-lcb", 2, static_cast<std::uint64_t>(s)}, audit);
    checks += r.trace.coverage.total_checks;
    if (r.trace.coverage.run_failed()) {
      ++failed_runs;
      continue;
    }
    ++clean;
    for (std::size_t i = 0; i < r.trace.checkpoints.size(); ++i)
      if (!(r.trace.pseudo[i] <= r.trace.interval_budget[i])) ++exceed;
  }
  const double rate = static_cast<double>(failed_runs) / kCoverageRuns;
  const double secs = seconds_since(t0);
  CoverageOutcome out;
  out.coverage = {"coverage", rate <= kCoverageMaxRate,
                  fmt("run-level violation rate %.4f over %.0f runs", rate, kCoverageRuns) +
                      " (" + std::to_string(checks) + " bracket checks), " +
                      fmt("%.1f s", secs)};
  out.pseudo = {"pseudo-regret within interval budget", exceed == 0 && clean > 0,
                std::to_string(exceed) + " checkpoint exceedances over " +
                    std::to_string(clean) + " clean runs"};
  return out;
}

struct RateOutcome {
  Line rate, monotone, topm;
};

RateOutcome rate_checks(InvariantAudit& audit) {
  const auto t0 = Clock::now();
  Json d = bank_doc("rate", kRateT);
  d["M"] = {1, 2, 4};
  const ExperimentConfig cfg = parse_config(d);
  const Scenario sc = build_scenario(cfg);
  std::map<Index, std::vector<RunResult>> runs;
  InvariantAudit topm_audit;
  for (Index m : {Index{1}, Index{2}, Index{4}})
    for (int s = 1; s <= kRateSeeds; ++s) {
      InvariantAudit local;
      runs[m].push_back(run_audited(cfg, sc, {"m-lcb", m, static_cast<std::uint64_t>(s)}, local));
      audit.rounds += local.rounds;
      audit.violations += local.violations;
      if (topm_audit.topm_rounds == 0 || local.min_topm_increment < topm_audit.min_topm_increment)
        topm_audit.min_topm_increment = local.min_topm_increment;
      topm_audit.topm_rounds += local.topm_rounds;
    }
  const auto t = as_double(runs[2].front().trace.checkpoints);
  const double slope =
      loglog_slope(t, mean_series(runs[2], &RegretTrace::realized), 1e3, static_cast<double>(kRateT));
  const double topm_slope =
      loglog_slope(t, mean_series(runs[2], &RegretTrace::topm), 1e3, static_cast<double>(kRateT));
  const double m1 = mean_series(runs[1], &RegretTrace::realized).back();
  const double m2 = mean_series(runs[2], &RegretTrace::realized).back();
  const double m4 = mean_series(runs[4], &RegretTrace::realized).back();
  const double secs = seconds_since(t0);
  RateOutcome out;
  out.rate = {"rate check (M=2)", slope <= kSlopeMax,
              fmt("log-log slope %.4f over [1e3, 1e5], %.1f s for 90 runs", slope, secs)};
  out.monotone = {"budget monotonicity", m1 > m2 && m2 > m4 && m1 / m4 >= kMonotoneRatio,
                  fmt("mean regret at T: M=1 %.1f, M=2 %.1f, M=4 %.1f", m1, m2, m4) +
                      fmt(", ratio M1/M4 %.2f", m1 / m4)};
  out.topm = {"top-M regret",
              topm_slope <= kSlopeMax && topm_audit.min_topm_increment >= -kTopmIncrementTol,
              fmt("log-log slope %.4f (M=2), min per-round increment %.3g over %.0f rounds",
                  topm_slope, topm_audit.min_topm_increment,
                  static_cast<double>(topm_audit.topm_rounds))};
  return out;
}

Line martingale_gap(InvariantAudit& audit) {
  Json d = bank_doc("gap", kGapT);
  d["M"] = 2;
  const ExperimentConfig cfg = parse_config(d);
  const Scenario sc = build_scenario(cfg);
  double sum = 0.0;
  for (int s = 1; s <= kGapSeeds; ++s) {
    const RunResult r =
        run_audited(cfg, sc, {"m-lcb", 2, static_cast<std::uint64_t>(1000 + s)}, audit);
    sum += r.trace.realized.back() - r.trace.pseudo.back();
  }
  const double gap = sum / kGapSeeds;
  return {"martingale gap", std::fabs(gap) <= kGapMax,
          fmt("|mean(realized - pseudo)| at T=1e4 over 100 seeds = %.3f (limit %.0f)",
              std::fabs(gap), kGapMax)};
}

// -- GLM ------------------------------------------------------------------------------

Line glm_experiment(InvariantAudit& audit) {
  const auto t0 = Clock::now();
  Json d;
  d["name"] = "glm";
  d["environment"] = {{"preset", "glm-appendixA"}};
  d["M"] = {1, 2, 3};
  d["T"] = 20000;
  d["delta"] = 0.1;
  d["procedures"] = {"m-lcb", "round-robin"};
  d["confidence"] = {{"scheme", "standard"}, {"scale", 0.3}};
  d["output"] = {{"dir", "unused"}};
  const ExperimentConfig cfg = parse_config(d);
  const Scenario sc = build_scenario(cfg);
  const auto& oracle = *sc.oracle;
  const Index k = oracle.size();
  const Index k_star =
      static_cast<Index>(std::min_element(oracle.begin(), oracle.end()) - oracle.begin());
  std::vector<Index> order(k);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return oracle[a] < oracle[b]; });
  const std::vector<Index> top3(order.begin(), order.begin() + 3);

  bool pass = true;
  std::string detail = "k*=" + std::to_string(k_star + 1);
  for (Index m : {Index{1}, Index{2}, Index{3}}) {
    int mode_hits = 0;
    Eigen::VectorXd mlcb_alloc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd rr_alloc = mlcb_alloc;
    for (int s = 1; s <= kGlmSeeds; ++s) {
      const auto seed = static_cast<std::uint64_t>(s);
      const RunResult r = run_audited(cfg, sc, {"m-lcb", m, seed}, audit);
      Eigen::Index mode = 0;
      r.trace.final_window_advisor_counts.maxCoeff(&mode);
      if (static_cast<Index>(mode) == k_star) ++mode_hits;
      mlcb_alloc += r.trace.trained.bottomRows(1).transpose();
      const RunResult q = run_audited(cfg, sc, {"round-robin", m, seed}, audit);
      rr_alloc += q.trace.trained.bottomRows(1).transpose();
    }
    mlcb_alloc /= mlcb_alloc.sum();
    rr_alloc /= rr_alloc.sum();
    double top3_share = 0.0;
    for (Index i : top3) top3_share += mlcb_alloc(static_cast<Eigen::Index>(i));
    const double rr_dev = ((rr_alloc.array() - 1.0 / k).abs() / (1.0 / k)).maxCoeff();
    const double mode_share = static_cast<double>(mode_hits) / kGlmSeeds;
    const bool ok = (m < 2 || mode_share >= kGlmModeShare) && top3_share >= kGlmTop3Share &&
                    rr_dev <= kRoundRobinRelTol;
    pass = pass && ok;
    detail += "; M=" + std::to_string(m) +
              fmt(": mode=k* %.2f, top-3 share %.3f, round-robin max rel dev %.4f", mode_share,
                  top3_share, rr_dev);
  }
  detail += fmt("; %.1f s", seconds_since(t0));
  return {"GLM model selection", pass, detail};
}

// -- golden trace ----------------------------------------------------------------------

Line golden_trace() {
  const Json d = Json::parse(R"({
    "name": "golden",
    "environment": {"preset": "bernoulli-bank",
                    "params": {"means": [[0.3, 0.6], [0.5, 0.2], [0.8, 0.7]]}},
    "M": 1, "T": 10, "delta": 0.1,
    "procedures": ["m-lcb"],
    "seeds": [2024],
    "output": {"dir": "unused", "trace": "full"}
  })");
  const ExperimentConfig cfg = parse_config(d);
  const CellOutcome cell = run_cell(cfg, build_scenario(cfg), {"m-lcb", 1, 2024});
  std::ifstream in(std::filesystem::path(MLCB_GOLDEN_DIR) / "trace_k3_m1.csv", std::ios::binary);
  std::stringstream frozen;
  frozen << in.rdbuf();
  const bool same = !cell.error && !frozen.str().empty() && cell.csv == frozen.str();
  return {"golden trace", same,
          same ? "byte-identical (" + std::to_string(cell.csv.size()) + " bytes)"
               : "engine output differs from the frozen trace"};
}

Line guarded(const std::string& name, const std::function<Line()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  InvariantAudit audit;
  std::vector<Line> lines(11);
  lines[0] = guarded("formula suite", formula_suite);
  lines[2] = guarded("selection optimality oracle", selection_oracle);
  try {
    const auto c = coverage_and_budget(audit);
    lines[3] = c.coverage;
    lines[4] = c.pseudo;
  } catch (const std::exception& e) {
    lines[3] = {"coverage", false, e.what()};
    lines[4] = {"pseudo-regret within interval budget", false, e.what()};
  }
  try {
    const auto r = rate_checks(audit);
    lines[5] = r.rate;
    lines[6] = r.monotone;
    lines[7] = r.topm;
  } catch (const std::exception& e) {
    lines[5] = {"rate check (M=2)", false, e.what()};
    lines[6] = {"budget monotonicity", false, e.what()};
    lines[7] = {"top-M regret", false, e.what()};
  }
  lines[8] = guarded("GLM model selection", [&] { return glm_experiment(audit); });
  lines[9] = guarded("golden trace", golden_trace);
  lines[10] = guarded("martingale gap", [&] { return martingale_gap(audit); });
  lines[1] = {"budget invariants",
              audit.violations == 0 && audit.rounds >= kMinAuditedRounds,
              std::to_string(audit.violations) + " violations over " +
                  std::to_string(audit.rounds) + " audited rounds"};

  int failures = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::printf("%s [%2zu] %s: %s\n", lines[i].pass ? "PASS" : "FAIL", i + 1,
                lines[i].name.c_str(), lines[i].detail.c_str());
    if (!lines[i].pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(lines.size()) - failures,
              lines.size());
  return failures == 0 ? 0 : 1;
}
