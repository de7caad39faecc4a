#include "mlcb/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mlcb/harness/presets.hpp"

namespace mlcb::harness {

namespace {

const std::set<std::string> kTopLevel = {
    "schema_version", "name",  "environment", "K",       "experts",
    "M",              "T",     "delta",       "procedures", "procedure",
    "confidence",     "seeds", "output",      "threads", "limited_advice"};

const std::set<std::string> kExpertKeys = {"bound_constant", "wrapper", "advice",
                                           "eta0", "lipschitz", "step"};

struct Checker {
  std::vector<Diagnostic> out;
  void add(std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  }
};

bool is_int(const Json& j) { return j.is_number_integer() || j.is_number_unsigned(); }

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::vector<Json> as_list(const Json& j) {
  if (j.is_array()) return {j.begin(), j.end()};
  return {j};
}

std::optional<Scheme> parse_scheme(const std::string& s) {
  if (s == "standard") return Scheme::Standard;
  if (s == "standard-tight") return Scheme::StandardTight;
  if (s == "self-normalized") return Scheme::SelfNormalized;
  return std::nullopt;
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Standard: return "standard";
    case Scheme::StandardTight: return "standard-tight";
    case Scheme::SelfNormalized: return "self-normalized";
  }
  return "standard";
}

void check_experts(const Json& e, Checker& c) {
  if (!e.is_object()) {
    c.add("/experts", "must be an object of overrides");
    return;
  }
  for (const auto& [key, v] : e.items()) {
    const std::string f = "/experts/" + key;
    if (!kExpertKeys.count(key)) {
      c.add(f, "unknown expert override (known: bound_constant, wrapper, advice, "
               "eta0, lipschitz, step)");
    } else if (key == "wrapper") {
      if (!v.is_string() || (v != "averaging" && v != "sampling"))
        c.add(f, "must be \"averaging\" or \"sampling\"");
    } else if (key == "advice") {
      if (!v.is_string() || (v != "probability" && v != "empirical"))
        c.add(f, "must be \"probability\" or \"empirical\"");
    } else if (key == "step") {
      if (!v.is_string() || (v != "constant" && v != "inverse-sqrt"))
        c.add(f, "must be \"constant\" or \"inverse-sqrt\"");
    } else if (!v.is_number() || !(v.get<double>() > 0.0) ||
               !std::isfinite(v.get<double>())) {
      c.add(f, "must be a positive number");
    }
  }
}

}  // namespace

std::string format(const Diagnostic& d) { return d.field + ": " + d.message; }

const std::vector<std::string>& procedure_names() {
  static const std::vector<std::string> names{"m-lcb", "round-robin",
                                              "limited-advice", "oracle"};
  return names;
}

std::vector<Diagnostic> validate_config(const Json& doc) {
  Checker c;
  if (!doc.is_object()) {
    c.add("/", "configuration must be a JSON object");
    return c.out;
  }
  for (const auto& [key, v] : doc.items())
    if (!kTopLevel.count(key)) c.add("/" + key, "unknown field");

  if (doc.contains("schema_version") &&
      (!is_int(doc["schema_version"]) ||
       doc["schema_version"].get<int>() != kConfigSchemaVersion))
    c.add("/schema_version", "unsupported schema version (expected " +
                                 std::to_string(kConfigSchemaVersion) + ")");
  if (doc.contains("name") && !doc["name"].is_string())
    c.add("/name", "must be a string");

  // Environment and K.
  std::optional<Index> k;
  if (!doc.contains("environment") || !doc["environment"].is_object()) {
    c.add("/environment", "required object with a \"preset\" field");
  } else {
    const Json& env = doc["environment"];
    for (const auto& [key, v] : env.items())
      if (key != "preset" && key != "params") c.add("/environment/" + key, "unknown field");
    const Json params = env.value("params", Json::object());
    if (!env.contains("preset") || !env["preset"].is_string()) {
      c.add("/environment/preset",
            "required; available presets: " + join(preset_names()));
    } else {
      const auto preset = env["preset"].get<std::string>();
      const auto& names = preset_names();
      if (std::find(names.begin(), names.end(), preset) == names.end()) {
        c.add("/environment/preset", "unknown preset '" + preset +
                                         "'; available presets: " + join(names));
      } else if (!params.is_object()) {
        c.add("/environment/params", "must be an object");
      } else {
        try {
          k = preset_expert_count(preset, params);
        } catch (const std::exception& e) {
          c.add("/environment/params", e.what());
        }
      }
    }
  }
  if (doc.contains("K")) {
    if (!is_int(doc["K"]) || doc["K"].get<long long>() < 1)
      c.add("/K", "must be a positive integer");
    else if (k && static_cast<Index>(doc["K"].get<long long>()) != *k)
      c.add("/K", "K = " + std::to_string(doc["K"].get<long long>()) +
                      " but the environment has " + std::to_string(*k) + " experts");
  }

  if (doc.contains("M")) {
    for (const Json& m : as_list(doc["M"])) {
      if (!is_int(m)) {
        c.add("/M", "M must be an integer or a list of integers");
        continue;
      }
      const auto v = m.get<long long>();
      if (v < 1 || (k && static_cast<Index>(v) > *k)) {
        c.add("/M", "M must satisfy 1 ≤ M ≤ K (got M = " + std::to_string(v) +
                        (k ? ", K = " + std::to_string(*k) : std::string()) + ")");
      }
    }
    if (doc["M"].is_array() && doc["M"].empty()) c.add("/M", "list must not be empty");
  }
  if (doc.contains("T") && (!is_int(doc["T"]) || doc["T"].get<long long>() < 1))
    c.add("/T", "T must be an integer >= 1");
  if (doc.contains("delta")) {
    const Json& d = doc["delta"];
    if (!d.is_number() || !(d.get<double>() > 0.0 && d.get<double>() < 1.0))
      c.add("/delta", "delta in (0,1)");
  }

  const char* pkey = doc.contains("procedures") ? "procedures" : "procedure";
  if (doc.contains(pkey)) {
    const auto& names = procedure_names();
    for (const Json& p : as_list(doc[pkey])) {
      if (!p.is_string() ||
          std::find(names.begin(), names.end(), p.get<std::string>()) == names.end())
        c.add(std::string("/") + pkey, "unknown procedure " + p.dump() +
                                           "; available: " + join(names));
    }
    if (doc[pkey].is_array() && doc[pkey].empty())
      c.add(std::string("/") + pkey, "list must not be empty");
  }

  if (doc.contains("confidence")) {
    const Json& cf = doc["confidence"];
    if (!cf.is_object()) {
      c.add("/confidence", "must be an object");
    } else {
      for (const auto& [key, v] : cf.items())
        if (key != "scheme" && key != "scale") c.add("/confidence/" + key, "unknown field");
      if (cf.contains("scheme") &&
          (!cf["scheme"].is_string() || !parse_scheme(cf["scheme"].get<std::string>())))
        c.add("/confidence/scheme",
              "must be one of standard, standard-tight, self-normalized");
      if (cf.contains("scale") &&
          (!cf["scale"].is_number() || !(cf["scale"].get<double>() >= 0.0) ||
           !std::isfinite(cf["scale"].get<double>())))
        c.add("/confidence/scale", "must be a finite number >= 0");
    }
  }

  if (doc.contains("seeds")) {
    const Json& s = doc["seeds"];
    if (s.is_array()) {
      if (s.empty()) c.add("/seeds", "list must not be empty");
      for (const Json& v : s)
        if (!is_int(v) || v.get<long long>() < 0)
          c.add("/seeds", "seeds must be non-negative integers");
    } else if (s.is_object()) {
      for (const auto& [key, v] : s.items())
        if (key != "base" && key != "count") c.add("/seeds/" + key, "unknown field");
      if (s.contains("base") && (!is_int(s["base"]) || s["base"].get<long long>() < 0))
        c.add("/seeds/base", "must be a non-negative integer");
      if (s.contains("count") && (!is_int(s["count"]) || s["count"].get<long long>() < 1))
        c.add("/seeds/count", "must be an integer >= 1");
    } else {
      c.add("/seeds", "must be a list or {\"base\", \"count\"}");
    }
  }

  if (doc.contains("output")) {
    const Json& o = doc["output"];
    if (!o.is_object()) {
      c.add("/output", "must be an object");
    } else {
      for (const auto& [key, v] : o.items())
        if (key != "dir" && key != "trace" && key != "per_decade")
          c.add("/output/" + key, "unknown field");
      if (o.contains("dir") && !o["dir"].is_string()) c.add("/output/dir", "must be a string");
      if (o.contains("trace") && o["trace"] != "compact" && o["trace"] != "full")
        c.add("/output/trace", "must be \"compact\" or \"full\"");
      if (o.contains("per_decade") &&
          (!is_int(o["per_decade"]) || o["per_decade"].get<long long>() < 1))
        c.add("/output/per_decade", "must be an integer >= 1");
    }
  }
  if (doc.contains("threads") &&
      (!is_int(doc["threads"]) || doc["threads"].get<long long>() < 1))
    c.add("/threads", "must be an integer >= 1");
  if (doc.contains("experts")) check_experts(doc["experts"], c);
  if (doc.contains("limited_advice")) {
    const Json& la = doc["limited_advice"];
    if (!la.is_object() ||
        (la.contains("gamma") &&
         (!la["gamma"].is_number() ||
          !(la["gamma"].get<double>() >= 0.0 && la["gamma"].get<double>() <= 1.0))))
      c.add("/limited_advice/gamma", "gamma in [0,1]");
  }
  return c.out;
}

ExperimentConfig parse_config(const Json& doc) {
  const auto diags = validate_config(doc);
  if (!diags.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& d : diags) msg += "\n  " + format(d);
    throw ConfigError(msg);
  }
  ExperimentConfig cfg;
  cfg.name = doc.value("name", cfg.name);
  cfg.preset = doc["environment"]["preset"].get<std::string>();
  cfg.params = doc["environment"].value("params", Json::object());
  cfg.experts = doc.value("experts", Json::object());
  if (doc.contains("M")) {
    cfg.budgets.clear();
    for (const Json& m : as_list(doc["M"])) cfg.budgets.push_back(m.get<Index>());
  }
  cfg.horizon = doc.value("T", cfg.horizon);
  cfg.delta = doc.value("delta", cfg.delta);
  const char* pkey = doc.contains("procedures") ? "procedures" : "procedure";
  if (doc.contains(pkey)) {
    cfg.procedures.clear();
    for (const Json& p : as_list(doc[pkey])) cfg.procedures.push_back(p.get<std::string>());
  }
  if (doc.contains("confidence")) {
    const Json& cf = doc["confidence"];
    if (cf.contains("scheme")) cfg.scheme = *parse_scheme(cf["scheme"].get<std::string>());
    cfg.scale = cf.value("scale", cfg.scale);
  }
  if (doc.contains("seeds")) {
    const Json& s = doc["seeds"];
    cfg.seeds.clear();
    if (s.is_array()) {
      for (const Json& v : s) cfg.seeds.push_back(v.get<std::uint64_t>());
    } else {
      const auto base = s.value("base", std::uint64_t{1});
      const auto count = s.value("count", std::uint64_t{1});
      for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
    }
  }
  if (doc.contains("output")) {
    const Json& o = doc["output"];
    cfg.output_dir = o.value("dir", std::string());
    cfg.trace_mode =
        o.value("trace", std::string("compact")) == "full" ? CheckpointMode::Full
                                                            : CheckpointMode::Compact;
    cfg.per_decade = o.value("per_decade", cfg.per_decade);
  }
  if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir(cfg.name).string();
  cfg.threads = doc.value("threads", cfg.threads);
  if (doc.contains("limited_advice"))
    cfg.gamma = doc["limited_advice"].value("gamma", cfg.gamma);
  return cfg;
}

Json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": JSON syntax error");
  }
}

Json to_json(const ExperimentConfig& cfg) {
  Json seeds = Json::array();
  for (auto s : cfg.seeds) seeds.push_back(s);
  Json m = Json::array();
  for (auto b : cfg.budgets) m.push_back(b);
  return Json{
      {"schema_version", kConfigSchemaVersion},
      {"name", cfg.name},
      {"environment", {{"preset", cfg.preset}, {"params", cfg.params}}},
      {"experts", cfg.experts},
      {"M", m},
      {"T", cfg.horizon},
      {"delta", cfg.delta},
      {"procedures", cfg.procedures},
      {"confidence", {{"scheme", scheme_name(cfg.scheme)}, {"scale", cfg.scale}}},
      {"seeds", seeds},
      {"output",
       {{"dir", cfg.output_dir},
        {"trace", cfg.trace_mode == CheckpointMode::Full ? "full" : "compact"},
        {"per_decade", cfg.per_decade}}},
      {"threads", cfg.threads},
      {"limited_advice", {{"gamma", cfg.gamma}}},
  };
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like path.to.field=value: '" + assignment + "'");
  std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  std::string pointer;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) pointer += "/" + part;
  doc[Json::json_pointer(pointer)] = value;
}

std::filesystem::path default_output_dir(const std::string& name) {
  const char* root = std::getenv("MLCB_OUTPUT_ROOT");
  const std::filesystem::path base = root && *root ? root : "runs";
  return base / name;
}

std::string config_hash(const ExperimentConfig& cfg) {
  Json j = to_json(cfg);
  // Where and how wide the run executes does not change its results.
  j["output"].erase("dir");
  j.erase("threads");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mlcb::harness
