// Command-line simulator: run / validate / oracle.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mlcb/harness/experiment.hpp"

using namespace mlcb;
using namespace mlcb::harness;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitCellFailed = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

int report(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "error: " << format(d) << "\n";
  return diags.empty() ? 0 : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"M-LCB budgeted expert-selection simulator"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<long long> seed_count, horizon;
  std::string m_list, out_dir;
  std::vector<std::string> procedures, sets;
  std::optional<int> threads;
  bool dry_run = false;

  auto* run = app.add_subcommand("run", "run every (procedure, M, seed) cell");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed-count", seed_count, "number of seeds, counted from the base seed");
  run->add_option("--M", m_list, "comma-separated budgets, e.g. 1,2,3");
  run->add_option("--procedure", procedures,
                  "procedure(s): m-lcb, round-robin, limited-advice, oracle")
      ->delimiter(',');
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--T", horizon, "horizon");
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--set", sets, "override any field: path.to.field=<json>");
  run->add_flag("--dry-run", dry_run, "validate and print the resolved config only");

  auto* validate = app.add_subcommand("validate", "check a config and list diagnostics");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* oracle = app.add_subcommand("oracle", "print the L_k^* table");
  oracle->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Json doc = read_config_file(config_path);

    if (*run) {
      if (seed_count) {
        std::uint64_t base = 1;
        if (doc.contains("seeds") && doc["seeds"].is_object())
          base = doc["seeds"].value("base", base);
        else if (doc.contains("seeds") && doc["seeds"].is_array() && !doc["seeds"].empty() &&
                 doc["seeds"][0].is_number_unsigned())
          base = doc["seeds"][0].get<std::uint64_t>();
        doc["seeds"] = {{"base", base}, {"count", *seed_count}};
      }
      if (!m_list.empty()) {
        Json ms = Json::array();
        for (const auto& s : split(m_list, ',')) {
          try {
            ms.push_back(std::stoll(s));
          } catch (const std::exception&) {
            ms.push_back(s);  // reported by validation
          }
        }
        doc["M"] = ms;
      }
      if (!procedures.empty()) {
        doc.erase("procedure");
        doc["procedures"] = procedures;
      }
      if (!out_dir.empty()) doc["output"]["dir"] = out_dir;
      if (horizon) doc["T"] = *horizon;
      if (threads) doc["threads"] = *threads;
      for (const auto& s : sets) apply_override(doc, s);
    }

    if (const int rc = report(validate_config(doc)); rc != 0) return rc;
    const ExperimentConfig cfg = parse_config(doc);

    if (*validate) {
      std::cout << "ok: " << enumerate_cells(cfg).size() << " cells\n";
      return 0;
    }
    if (*run && dry_run) {
      std::cout << to_json(cfg).dump(2) << "\n";
      std::cout << "# " << enumerate_cells(cfg).size() << " cells, nothing written\n";
      return 0;
    }

    const Scenario sc = build_scenario(cfg);
    if (*oracle) {
      if (!sc.oracle) {
        std::cout << "no oracle available for preset " << cfg.preset << "\n";
        return 1;
      }
      std::printf("%4s  %-26s %-14s %s\n", "k", "L_k*", "std_error", "");
      for (Index k = 0; k < sc.experts; ++k) {
        const double se = sc.oracle_estimates.empty() ? 0.0 : sc.oracle_estimates[k].std_error;
        std::printf("%4zu  %-26.17g %-14.3g%s\n", k + 1, (*sc.oracle)[k], se,
                    sc.oracle_estimates.empty() ? " (analytic)" : "");
      }
      return 0;
    }

    ExecutionOptions eo;
    eo.threads = cfg.threads;
    eo.keep_csv = false;
    const auto out = run_experiment(cfg, sc, eo);
    std::size_t failed = 0;
    for (const auto& c : out.cells) {
      if (c.error) {
        ++failed;
        std::cerr << "cell " << c.key.id() << " failed: " << *c.error << "\n";
      }
    }
    std::cout << out.cells.size() - failed << "/" << out.cells.size()
              << " cells ok; outputs in " << cfg.output_dir << "\n";
    return failed ? kExitCellFailed : 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
