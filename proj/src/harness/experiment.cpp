#include "mlcb/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include "mlcb/baselines.hpp"

#ifndef MLCB_VERSION
#define MLCB_VERSION "0.0.0"
#endif

namespace mlcb::harness {

namespace fs = std::filesystem;

std::string tool_version() { return std::string("mlcb ") + MLCB_VERSION; }

std::string CellKey::id() const {
  return procedure + "_M" + std::to_string(m) + "_s" + std::to_string(seed);
}

bool CellKey::operator<(const CellKey& o) const {
  return std::tie(procedure, m, seed) < std::tie(o.procedure, o.m, o.seed);
}

std::vector<CellKey> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellKey> out;
  for (const auto& p : cfg.procedures)
    for (Index m : cfg.budgets)
      for (auto s : cfg.seeds) out.push_back({p, m, s});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](const CellKey& a, const CellKey& b) {
                          return !(a < b) && !(b < a);
                        }),
            out.end());
  return out;
}

// -- CSV -------------------------------------------------------------------------

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string s = "\"";
  for (char c : raw) {
    if (c == '"') s += '"';
    s += c;
  }
  return s + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(Index experts) {
  std::string h =
      "run_id,procedure,M,seed,t,advisor,training_set,loss,advice_expected_loss,"
      "realized_regret,pseudo_regret,topm_regret,interval_budget";
  for (Index k = 1; k <= experts; ++k) h += ",n_" + std::to_string(k);
  return h;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string joined_ids(const std::vector<Index>& ids) {
  std::string s;
  for (Index k : ids) s += (s.empty() ? "" : ";") + std::to_string(k + 1);
  return s;
}

}  // namespace

// -- cells -----------------------------------------------------------------------

std::unique_ptr<Procedure> make_procedure(const ExperimentConfig& cfg,
                                          const Scenario& sc, const CellKey& key) {
  if (key.procedure == "m-lcb") {
    ConfidenceConfig cc;
    cc.delta = cfg.delta;
    cc.experts = sc.experts;
    cc.scheme = cfg.scheme;
    cc.scale = cfg.scale;
    std::vector<RegretBound> bounds;
    for (const auto& s : sc.expert_specs) bounds.push_back(regret_bound_for(s));
    return std::make_unique<MlcbProcedure>(key.m, cc, std::move(bounds));
  }
  if (key.procedure == "round-robin")
    return std::make_unique<RoundRobinProcedure>(sc.experts, key.m);
  if (key.procedure == "limited-advice")
    return std::make_unique<LimitedAdviceProcedure>(sc.experts, key.m, key.seed,
                                                    cfg.gamma);
  if (key.procedure == "oracle") return std::make_unique<OracleProcedure>(sc.oracle, key.m);
  throw ConfigError("unknown procedure '" + key.procedure + "'");
}

CellOutcome run_cell(const ExperimentConfig& cfg, const Scenario& sc,
                     const CellKey& key, bool emit_csv, bool keep_records) {
  CellOutcome out;
  out.key = key;
  try {
    auto env = sc.make_env();
    std::vector<std::unique_ptr<Expert>> experts;
    for (Index k = 0; k < sc.experts; ++k)
      experts.push_back(make_expert(k, sc.expert_specs[k], key.seed));
    auto proc = make_procedure(cfg, sc, key);
    const bool is_mlcb = key.procedure == "m-lcb";

    RunnerOptions ro;
    ro.budget = key.m;
    ro.seed = key.seed;
    ro.record_bounds = is_mlcb;
    Runner runner(*env, std::move(experts), std::move(proc), ro);

    HorizonOptions ho;
    ho.horizon = cfg.horizon;
    ho.checkpoints = checkpoint_schedule(cfg.horizon, cfg.trace_mode, cfg.per_decade);
    ho.final_window_start = cfg.horizon - cfg.horizon / 10;
    ho.oracle = sc.oracle;
    ho.keep_records = keep_records;
    if (is_mlcb && cfg.scheme == Scheme::Standard) {
      RegretAccumulator::BudgetContext bc;
      bc.cfg.delta = cfg.delta;
      bc.cfg.experts = sc.experts;
      bc.cfg.scale = cfg.scale;
      for (const auto& s : sc.expert_specs) bc.bounds.push_back(regret_bound_for(s));
      ho.budget = std::move(bc);
    }

    std::string csv;
    if (emit_csv) {
      csv = csv_header(sc.experts) + "\r\n";
      const std::string prefix = csv_field(key.id()) + "," + csv_field(key.procedure) +
                                 "," + std::to_string(key.m) + "," +
                                 std::to_string(key.seed) + ",";
      ho.sink = [&csv, prefix, cps = ho.checkpoints, next = std::size_t{0}](
                    const RoundRecord& rec, const ExpertLedger& ledger,
                    const RegretAccumulator& acc) mutable {
        while (next < cps.size() && cps[next] < rec.t) ++next;
        if (next >= cps.size() || cps[next] != rec.t) return;
        const RegretTrace& tr = acc.trace();
        std::string row = prefix;
        row += std::to_string(rec.t) + "," + std::to_string(rec.advisor + 1) + "," +
               csv_field(joined_ids(rec.training_set)) + "," + csv_number(rec.loss) +
               "," + csv_number(rec.advice_expected_loss.value_or(kNaN));
        const bool have = !tr.checkpoints.empty() && tr.checkpoints.back() == rec.t;
        for (const auto* series : {&tr.realized, &tr.pseudo, &tr.topm, &tr.interval_budget})
          row += "," + csv_number(have ? series->back() : kNaN);
        for (Index k = 0; k < ledger.size(); ++k)
          row += "," + std::to_string(ledger.trained(k));
        csv += row + "\r\n";
      };
    }
    out.result = run_horizon(runner, std::move(ho));
    out.error = out.result.error;
    out.csv = std::move(csv);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// -- summary ---------------------------------------------------------------------

namespace {

Json series_stats(const std::vector<const std::vector<double>*>& runs, std::size_t len) {
  Json mean = Json::array(), sd = Json::array(), lo = Json::array(), hi = Json::array();
  bool any = false;
  for (std::size_t i = 0; i < len; ++i) {
    double s = 0.0;
    bool ok = !runs.empty();
    for (const auto* r : runs) {
      if (i >= r->size() || std::isnan((*r)[i])) {
        ok = false;
        break;
      }
      s += (*r)[i];
    }
    if (!ok) {
      for (Json* j : {&mean, &sd, &lo, &hi}) j->push_back(nullptr);
      continue;
    }
    any = true;
    const double n = static_cast<double>(runs.size());
    const double m = s / n;
    double ss = 0.0;
    for (const auto* r : runs) ss += ((*r)[i] - m) * ((*r)[i] - m);
    const double st = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    mean.push_back(m);
    sd.push_back(st);
    lo.push_back(m - 0.5 * st);
    hi.push_back(m + 0.5 * st);
  }
  if (!any) return nullptr;
  return {{"mean", mean}, {"std", sd}, {"lower", lo}, {"upper", hi}};
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

Json summarize(const ExperimentConfig& cfg, const Scenario& sc,
               const std::vector<CellOutcome>& cells) {
  std::map<std::pair<std::string, Index>, std::vector<const CellOutcome*>> groups;
  for (const auto& c : cells) groups[{c.key.procedure, c.key.m}].push_back(&c);

  Json out;
  out["schema_version"] = kSummarySchemaVersion;
  out["tool_version"] = tool_version();
  out["config_hash"] = config_hash(cfg);
  out["experiment"] = cfg.name;
  out["preset"] = cfg.preset;
  out["K"] = sc.experts;
  out["T"] = cfg.horizon;
  out["delta"] = cfg.delta;
  out["band"] = "mean +/- 0.5 std (sample std over runs)";
  if (sc.oracle) {
    out["oracle"] = *sc.oracle;
    const auto it = std::min_element(sc.oracle->begin(), sc.oracle->end());
    out["k_star"] = static_cast<Index>(it - sc.oracle->begin()) + 1;
    out["l_star"] = *it;
  } else {
    out["oracle"] = nullptr;
  }
  if (!sc.oracle_estimates.empty()) {
    Json se = Json::array();
    for (const auto& e : sc.oracle_estimates) se.push_back(e.std_error);
    out["oracle_std_error"] = se;
  }

  Json gs = Json::array();
  for (const auto& [gk, members] : groups) {
    std::vector<const CellOutcome*> ok;
    Json failed = Json::array();
    for (const auto* c : members) {
      if (c->error) failed.push_back(c->key.id());
      else ok.push_back(c);
    }
    Json g;
    g["procedure"] = gk.first;
    g["M"] = gk.second;
    g["runs"] = ok.size();
    g["failed_runs"] = failed;
    if (ok.empty()) {
      gs.push_back(g);
      continue;
    }
    const RegretTrace& first = ok.front()->result.trace;
    const std::size_t len = first.checkpoints.size();
    g["checkpoints"] = first.checkpoints;

    auto collect = [&](auto member) {
      std::vector<const std::vector<double>*> v;
      for (const auto* c : ok) v.push_back(&(c->result.trace.*member));
      return v;
    };
    g["realized_regret"] = series_stats(collect(&RegretTrace::realized), len);
    g["pseudo_regret"] = series_stats(collect(&RegretTrace::pseudo), len);
    g["topm_regret"] = series_stats(collect(&RegretTrace::topm), len);
    g["interval_budget"] = series_stats(collect(&RegretTrace::interval_budget), len);

    const Index k = sc.experts;
    Eigen::VectorXd sel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd fin = sel, alloc = sel, modes = sel;
    std::uint64_t cov_runs = 0, cov_checks = 0, cov_viol = 0, exceed_clean = 0,
                  exceed_all = 0;
    for (const auto* c : ok) {
      const RegretTrace& tr = c->result.trace;
      sel += tr.advisor_counts;
      fin += tr.final_window_advisor_counts;
      if (tr.trained.rows() > 0) alloc += tr.trained.row(tr.trained.rows() - 1).transpose();
      Eigen::Index mode = 0;
      if (tr.final_window_advisor_counts.sum() > 0) {
        tr.final_window_advisor_counts.maxCoeff(&mode);
        modes(mode) += 1.0;
      }
      cov_checks += tr.coverage.total_checks;
      cov_viol += tr.coverage.violations;
      if (tr.coverage.run_failed()) ++cov_runs;
      exceed_all += tr.budget_exceedances;
      if (!tr.coverage.run_failed()) exceed_clean += tr.budget_exceedances;
    }
    const double n = static_cast<double>(ok.size());
    g["selection_histogram"] = vec(sel / n);
    g["final_selection_histogram"] = vec(fin / n);
    g["final_mode_counts"] = vec(modes);
    g["budget_allocation"] = vec(alloc / n);
    g["budget_allocation_share"] =
        alloc.sum() > 0 ? vec(alloc / alloc.sum()) : vec(alloc);
    g["coverage"] = {{"recorded", cov_checks > 0},
                     {"runs_with_violation", cov_runs},
                     {"run_violation_rate", cov_runs / n},
                     {"checks", cov_checks},
                     {"violations", cov_viol}};
    g["budget_exceedances"] = {{"all_runs", exceed_all}, {"clean_runs", exceed_clean}};
    Json audit = {{"rounds", 0}, {"violations", 0}, {"total_selected", 0}};
    for (const auto* c : ok) {
      audit["rounds"] = audit["rounds"].get<std::uint64_t>() + c->result.audit.rounds;
      audit["violations"] =
          audit["violations"].get<std::uint64_t>() + c->result.audit.violations;
      audit["total_selected"] =
          audit["total_selected"].get<std::int64_t>() + c->result.audit.total_selected;
    }
    g["budget_audit"] = audit;
    gs.push_back(g);
  }
  out["groups"] = gs;
  return out;
}

Json make_manifest(const ExperimentConfig& cfg, const std::vector<CellOutcome>& cells) {
  Json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["tool_version"] = tool_version();
  m["config_hash"] = config_hash(cfg);
  m["config"] = to_json(cfg);
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["summary_schema_version"] = kSummarySchemaVersion;
  Json cs = Json::array();
  std::size_t failed = 0;
  for (const auto& c : cells) {
    Json e = {{"id", c.key.id()},
              {"procedure", c.key.procedure},
              {"M", c.key.m},
              {"seed", c.key.seed},
              {"status", c.error ? "failed" : "ok"},
              {"trace", "trace_" + c.key.id() + ".csv"}};
    if (c.error) {
      e["error"] = *c.error;
      ++failed;
    }
    cs.push_back(e);
  }
  m["cells"] = cs;
  m["failed_cells"] = failed;
  return m;
}

ExperimentOutputs run_experiment(const ExperimentConfig& cfg, const Scenario& sc,
                                 const ExecutionOptions& opts) {
  const auto keys = enumerate_cells(cfg);
  ExperimentOutputs out;
  out.cells.resize(keys.size());
  const bool emit_csv = opts.write_files || opts.keep_csv;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++)
      out.cells[i] = run_cell(cfg, sc, keys[i], emit_csv, opts.keep_records);
  };
  const auto workers = static_cast<std::size_t>(
      std::clamp<long>(opts.threads, 1, static_cast<long>(std::max<std::size_t>(1, keys.size()))));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  out.summary = summarize(cfg, sc, out.cells);
  out.manifest = make_manifest(cfg, out.cells);
  if (opts.write_files) {
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    for (const auto& c : out.cells) {
      std::ofstream f(dir / ("trace_" + c.key.id() + ".csv"), std::ios::binary);
      f << c.csv;
    }
    std::ofstream(dir / "summary.json") << out.summary.dump(2) << "\n";
    std::ofstream(dir / "manifest.json") << out.manifest.dump(2) << "\n";
  }
  if (!opts.keep_csv)
    for (auto& c : out.cells) std::string().swap(c.csv);
  return out;
}

}  // namespace mlcb::harness
