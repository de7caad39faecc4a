#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mlcb/harness/experiment.hpp"

using namespace mlcb;
using namespace mlcb::harness;
namespace fs = std::filesystem;

namespace {

Json small_bank_config() {
  return Json::parse(R"({
    "name": "unit",
    "environment": {"preset": "bernoulli-bank",
                    "params": {"means": [[0.2, 0.4], [0.5, 0.6], [0.7, 0.9]]}},
    "M": [1, 2],
    "T": 1500,
    "delta": 0.1,
    "procedures": ["m-lcb", "round-robin", "limited-advice", "oracle"],
    "seeds": {"base": 3, "count": 3},
    "output": {"dir": "unused", "trace": "compact", "per_decade": 10}
  })");
}

bool has_message(const std::vector<Diagnostic>& d, const std::string& needle) {
  for (const auto& x : d)
    if (x.message.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(ValidateConfig, AcceptsWellFormedDocument) {
  EXPECT_TRUE(validate_config(small_bank_config()).empty());
}

TEST(ValidateConfig, BudgetOutOfRange) {
  Json c = small_bank_config();
  c["M"] = 0;
  const auto d = validate_config(c);
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(has_message(d, "M must satisfy 1 ≤ M ≤ K"));
  EXPECT_EQ(d.front().field, "/M");
  c["M"] = 4;
  EXPECT_TRUE(has_message(validate_config(c), "M must satisfy 1 ≤ M ≤ K"));
}

TEST(ValidateConfig, DeltaOutOfRange) {
  Json c = small_bank_config();
  c["delta"] = 1.5;
  const auto d = validate_config(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].message, "delta in (0,1)");
  EXPECT_EQ(d[0].field, "/delta");
}

TEST(ValidateConfig, UnknownPresetListsAvailable) {
  Json c = small_bank_config();
  c["environment"]["preset"] = "nope";
  const auto d = validate_config(c);
  ASSERT_FALSE(d.empty());
  for (const auto& name : preset_names()) EXPECT_TRUE(has_message(d, name));
}

TEST(ValidateConfig, ReportsEveryProblem) {
  Json c = small_bank_config();
  c["T"] = 0;
  c["threads"] = 0;
  c["typo"] = 1;
  c["procedures"] = {"m-lcb", "bogus"};
  c["confidence"] = {{"scheme", "weird"}};
  EXPECT_EQ(validate_config(c).size(), 5u);
  EXPECT_THROW(parse_config(c), ConfigError);
}

TEST(ValidateConfig, PresetParameterErrors) {
  Json c = small_bank_config();
  c["environment"] = {{"preset", "perturbed-game"},
                      {"params", {{"K", 3}, {"epsilon", 0.2}, {"gap", 0.3}}}};
  const auto d = validate_config(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "/environment/params");
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  const fs::path p = fs::temp_directory_path() / "mlcb_bad_config.json";
  std::ofstream(p) << "{\n  \"T\": 10,\n  \"M\": [1,,2]\n}\n";
  try {
    read_config_file(p);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Config, OverridesAndDefaults) {
  Json c = small_bank_config();
  apply_override(c, "confidence.scale=0.3");
  apply_override(c, "name=renamed");
  apply_override(c, "M=[2]");
  const ExperimentConfig cfg = parse_config(c);
  EXPECT_EQ(cfg.scale, 0.3);
  EXPECT_EQ(cfg.name, "renamed");
  EXPECT_EQ(cfg.budgets, (std::vector<Index>{2}));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_THROW(apply_override(c, "novalue"), ConfigError);
}

TEST(Config, OutputRootFromEnvironment) {
  ::setenv("MLCB_OUTPUT_ROOT", "/tmp/mlcb_root", 1);
  EXPECT_EQ(default_output_dir("x"), fs::path("/tmp/mlcb_root/x"));
  ::unsetenv("MLCB_OUTPUT_ROOT");
  EXPECT_EQ(default_output_dir("x"), fs::path("runs/x"));
}

TEST(Config, HashIgnoresPlacementButNotContent) {
  ExperimentConfig a = parse_config(small_bank_config());
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  b.threads = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.horizon += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Csv, HeaderMatchesGolden) {
  const std::string golden = slurp(fs::path(MLCB_GOLDEN_DIR) / "csv_header_k3.txt");
  EXPECT_EQ(csv_header(3) + "\n", golden);
}

TEST(Csv, QuotingAndNumbers) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(std::nan("")), "");
  EXPECT_EQ(std::stod(csv_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Experiment, RerunIsByteIdentical) {
  const ExperimentConfig cfg = parse_config(small_bank_config());
  const Scenario sc = build_scenario(cfg);
  ExecutionOptions eo;
  eo.write_files = false;
  const auto a = run_experiment(cfg, sc, eo);
  const auto b = run_experiment(cfg, sc, eo);
  ASSERT_EQ(a.cells.size(), 4u * 2u * 3u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_FALSE(a.cells[i].error) << *a.cells[i].error;
    EXPECT_EQ(a.cells[i].csv, b.cells[i].csv);
  }
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
}

TEST(Experiment, ParallelEqualsSequential) {
  const ExperimentConfig cfg = parse_config(small_bank_config());
  const Scenario sc = build_scenario(cfg);
  ExecutionOptions seq;
  seq.write_files = false;
  ExecutionOptions par = seq;
  par.threads = 4;
  const auto a = run_experiment(cfg, sc, seq);
  const auto b = run_experiment(cfg, sc, par);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].key.id(), b.cells[i].key.id());
    EXPECT_EQ(a.cells[i].csv, b.cells[i].csv);
  }
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
  EXPECT_EQ(a.manifest.dump(), b.manifest.dump());
}

TEST(Experiment, SummaryRecomputableFromCsv) {
  const fs::path dir = fs::temp_directory_path() / "mlcb_reaggregate";
  fs::remove_all(dir);
  Json doc = small_bank_config();
  doc["output"]["dir"] = dir.string();
  const ExperimentConfig cfg = parse_config(doc);
  const Scenario sc = build_scenario(cfg);
  run_experiment(cfg, sc);

  const Json summary = Json::parse(slurp(dir / "summary.json"));
  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(summary["schema_version"], kSummarySchemaVersion);
  EXPECT_EQ(manifest["schema_version"], kManifestSchemaVersion);
  EXPECT_EQ(manifest["failed_cells"], 0);

  // (procedure, M) -> t -> realized regrets across seeds, read back from CSVs.
  std::map<std::pair<std::string, long>, std::map<long, std::vector<double>>> realized;
  for (const Json& cell : manifest["cells"]) {
    const auto rows = parse_csv(slurp(dir / cell["trace"].get<std::string>()));
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0].size(), 13u + 3u);
    long prev_t = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const long t = std::stol(rows[r][4]);
      ASSERT_GT(t, prev_t);
      prev_t = t;
      realized[{rows[r][1], std::stol(rows[r][2])}][t].push_back(std::stod(rows[r][9]));
    }
  }
  int compared = 0;
  for (const Json& g : summary["groups"]) {
    const auto& per_t = realized.at({g["procedure"].get<std::string>(), g["M"].get<long>()});
    const Json& cps = g["checkpoints"];
    const Json& mean = g["realized_regret"]["mean"];
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const auto& vals = per_t.at(cps[i].get<long>());
      double s = 0.0;
      for (double v : vals) s += v;
      ASSERT_NEAR(mean[i].get<double>(), s / vals.size(), 1e-9);
      ++compared;
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Experiment, FailedCellIsRecordedWhileOthersComplete) {
  const ExperimentConfig cfg = parse_config(small_bank_config());
  Scenario sc = build_scenario(cfg);
  sc.oracle.reset();
  ExecutionOptions eo;
  eo.write_files = false;
  const auto out = run_experiment(cfg, sc, eo);
  std::size_t failed = 0;
  for (const auto& c : out.cells) {
    if (c.key.procedure == "oracle") {
      ASSERT_TRUE(c.error);
      ++failed;
    } else {
      EXPECT_FALSE(c.error);
    }
  }
  EXPECT_EQ(out.manifest["failed_cells"], failed);
  EXPECT_EQ(failed, 6u);
}

TEST(Experiment, RoundRobinAllocationIsUniform) {
  Json doc = small_bank_config();
  doc["procedures"] = {"round-robin"};
  doc["T"] = 3000;
  const ExperimentConfig cfg = parse_config(doc);
  const auto out = run_experiment(cfg, build_scenario(cfg), {1, false, false, false});
  for (const Json& g : out.summary["groups"])
    for (const Json& share : g["budget_allocation_share"])
      EXPECT_NEAR(share.get<double>(), 1.0 / 3.0, 1e-3);
}

TEST(Cli, ValidateDryRunAndRun) {
  const fs::path dir = fs::temp_directory_path() / "mlcb_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Json doc = small_bank_config();
  doc["output"]["dir"] = (dir / "out").string();
  std::ofstream(dir / "cfg.json") << doc.dump(2);
  Json bad = doc;
  bad["delta"] = 1.5;
  std::ofstream(dir / "bad.json") << bad.dump(2);

  const std::string cli = MLCB_CLI;
  auto run = [&](const std::string& args) {
    const int rc = std::system((cli + " " + args + " > " + (dir / "log.txt").string() +
                                " 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  EXPECT_EQ(run("validate " + (dir / "cfg.json").string()), 0);
  EXPECT_EQ(run("validate " + (dir / "bad.json").string()), 2);
  EXPECT_NE(slurp(dir / "log.txt").find("delta in (0,1)"), std::string::npos);
  EXPECT_EQ(run("run " + (dir / "cfg.json").string() + " --dry-run"), 0);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(run("run " + (dir / "cfg.json").string() +
                " --procedure m-lcb --M 2 --seed-count 2 --threads 2"),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "trace_m-lcb_M2_s4.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "trace_m-lcb_M1_s3.csv"));
  EXPECT_EQ(run("oracle " + (dir / "cfg.json").string()), 0);
  EXPECT_NE(slurp(dir / "log.txt").find("0.5"), std::string::npos);
}
