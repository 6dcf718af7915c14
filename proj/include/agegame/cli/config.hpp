#pragma once

// Flat key=value run configuration with dotted section prefixes:
//
//   # ten-node line
//   params.p_e = 0.3
//   params.beta = 0.6
//   topology.class = line
//   topology.n = 10
//
// Blank lines and lines starting with '#' are ignored. Unknown keys and
// duplicate keys are rejected.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "agegame/core.hpp"
#include "agegame/equilibrium.hpp"
#include "agegame/sim.hpp"

namespace agegame::cli {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "params.p_e",       "params.beta",        "params.p",         "params.L",
      "topology.class",   "topology.n",         "topology.r",       "topology.depth",
      "topology.edges",   "profile.actions",    "sim.horizon",      "sim.replications",
      "sim.burn_in",      "sim.workers",        "cost.kind",        "cost.c0",
      "cost.table",       "sweep.variable",     "sweep.from",       "sweep.to",
      "sweep.steps",      "seed",               "output.path",      "output.format",
      "equilibria.cap",   "equilibria.oracle",  "optimize.beta_min", "optimize.k_min",
      "optimize.k_max",   "optimize.grid",      "optimize.compare", "optimize.tree_r",
      "optimize.star_r",
  };
  return keys;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Raw key/value store with typed accessors.
class KeyValues {
public:
  static KeyValues parse(std::string_view text) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      }
      auto key = trim(std::string_view(t).substr(0, eq));
      auto value = trim(std::string_view(t).substr(eq + 1));
      if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
      if (!kv.values_.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
    }
    return kv;
  }

  static KeyValues load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double real(const std::string& key) const { return to_real(key, str(key)); }
  double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

  std::int64_t integer(const std::string& key) const { return to_integer(key, str(key)); }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = str(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "' expects true|false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& piece : split(str(key), ',')) out.push_back(to_real(key, piece));
    return out;
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
  }

  static double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
      throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
    }
    return out;
  }
  static std::int64_t to_integer(const std::string& key, const std::string& v) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
      throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
  }

private:
  std::map<std::string, std::string> values_;
};

enum class Format { Csv, Json };

inline Format parse_format(const std::string& v) {
  if (v == "csv") return Format::Csv;
  if (v == "json") return Format::Json;
  throw ConfigError("output.format must be csv or json, got '" + v + "'");
}

struct TopologySpec {
  std::string kind;  // line | tree | star | general
  Topology topology;
  int r = 0;
  int depth = 0;
};

struct SweepSpec {
  double from = 0.0;
  double to = 0.0;
  std::int64_t steps = 0;
};

struct RunConfig {
  SystemParams params{0.5, 0.5, 0.5, 1.0};
  TopologySpec topology{"line", Topology::line(1)};
  std::optional<SubscriptionProfile> profile;
  SimConfig sim;
  CostFunction cost;
  std::optional<SweepSpec> sweep;
  std::optional<std::string> output_path;
  Format format = Format::Csv;
  int cap = kDefaultEnumerationCap;
  std::string oracle = "auto";  // auto | analytic | simulation
  OptimizeOptions optimize;
  std::vector<double> grid;
  bool compare = false;
  int tree_r = 2;
  int star_r = 0;
};

inline TopologySpec build_topology(const KeyValues& kv) {
  const auto kind = kv.str("topology.class");
  auto as_int = [&](const std::string& key) {
    const auto v = kv.integer(key);
    if (v < 1 || v > 50'000'000) throw ConfigError("key '" + key + "' out of range");
    return static_cast<int>(v);
  };
  if (kind == "line") {
    return {kind, Topology::line(as_int("topology.n"))};
  }
  if (kind == "tree") {
    const int r = as_int("topology.r");
    const int depth = as_int("topology.depth");
    return {kind, Topology::tree(r, depth), r, depth};
  }
  if (kind == "star") {
    const int r = as_int("topology.r");
    return {kind, Topology::star(r), r};
  }
  if (kind == "general") {
    std::vector<Edge> edges;
    if (kv.has("topology.edges")) {
      for (const auto& pair : split(kv.str("topology.edges"), ',')) {
        const auto ends = split(pair, '-');
        if (ends.size() != 2) throw ConfigError("topology.edges expects i-j pairs, got '" + pair + "'");
        edges.emplace_back(static_cast<int>(KeyValues::to_integer("topology.edges", ends[0])),
                           static_cast<int>(KeyValues::to_integer("topology.edges", ends[1])));
      }
    }
    return {kind, Topology(as_int("topology.n"), std::move(edges))};
  }
  throw ConfigError("topology.class must be line|tree|star|general, got '" + kind + "'");
}

inline CostFunction build_cost(const KeyValues& kv) {
  const auto kind = kv.str("cost.kind", "zero");
  if (kind == "zero") return CostFunction::zero();
  if (kind == "quadratic") return CostFunction::quadratic(kv.real("cost.c0"));
  if (kind == "linear") return CostFunction::linear(kv.real("cost.c0"));
  if (kind == "table") {
    TableCost t;
    for (const auto& knot : split(kv.str("cost.table"), ',')) {
      const auto bc = split(knot, ':');
      if (bc.size() != 2) throw ConfigError("cost.table expects beta:cost pairs, got '" + knot + "'");
      t.knots.emplace_back(KeyValues::to_real("cost.table", bc[0]), KeyValues::to_real("cost.table", bc[1]));
    }
    return CostFunction(t);
  }
  throw ConfigError("cost.kind must be zero|quadratic|linear|table, got '" + kind + "'");
}

inline RunConfig build_run_config(const KeyValues& kv) {
  RunConfig c;
  c.params = SystemParams(kv.real("params.p_e"), kv.real("params.beta"), kv.real("params.p"), kv.real("params.L"));
  c.topology = build_topology(kv);
  if (kv.has("profile.actions")) {
    std::vector<bool> a;
    for (char ch : kv.str("profile.actions")) {
      if (ch == '1') a.push_back(true);
      else if (ch == '0') a.push_back(false);
      else if (ch != ',' && ch != ' ') throw ConfigError("profile.actions expects 0/1 digits");
    }
    c.profile = SubscriptionProfile::for_topology(c.topology.topology, std::move(a));
  }
  c.sim.horizon = kv.integer("sim.horizon", c.sim.horizon);
  c.sim.replications = kv.integer("sim.replications", c.sim.replications);
  if (kv.has("sim.burn_in")) c.sim.burn_in = kv.integer("sim.burn_in");
  const auto workers = kv.integer("sim.workers", 0);
  if (workers < 0) throw ConfigError("sim.workers must be >= 0");
  c.sim.workers = static_cast<unsigned>(workers);
  const auto seed = kv.integer("seed", 1);
  c.sim.master_seed = static_cast<std::uint64_t>(seed);
  c.sim.validate();
  c.cost = build_cost(kv);
  if (kv.has("sweep.variable") || kv.has("sweep.from") || kv.has("sweep.to") || kv.has("sweep.steps")) {
    if (kv.str("sweep.variable", "beta") != "beta") throw ConfigError("sweep.variable supports only beta");
    SweepSpec sw{kv.real("sweep.from"), kv.real("sweep.to"), kv.integer("sweep.steps")};
    if (sw.steps < 1) throw ConfigError("sweep.steps must be >= 1");
    if (!(sw.from > 0.0 && sw.to <= 1.0 && sw.from <= sw.to)) {
      throw ConfigError("sweep range must satisfy 0 < from <= to <= 1");
    }
    c.sweep = sw;
  }
  if (kv.has("output.path")) c.output_path = kv.str("output.path");
  c.format = parse_format(kv.str("output.format", "csv"));
  c.cap = static_cast<int>(kv.integer("equilibria.cap", kDefaultEnumerationCap));
  c.oracle = kv.str("equilibria.oracle", "auto");
  if (c.oracle != "auto" && c.oracle != "analytic" && c.oracle != "simulation") {
    throw ConfigError("equilibria.oracle must be auto|analytic|simulation");
  }
  c.optimize.beta_min = kv.real("optimize.beta_min", c.optimize.beta_min);
  c.optimize.k_min = kv.integer("optimize.k_min", c.optimize.k_min);
  if (kv.has("optimize.k_max")) c.optimize.k_max = kv.integer("optimize.k_max");
  c.optimize.enumeration_cap = c.cap;
  if (kv.has("optimize.grid")) c.grid = kv.reals("optimize.grid");
  c.compare = kv.boolean("optimize.compare", false);
  c.tree_r = static_cast<int>(kv.integer("optimize.tree_r", 2));
  c.star_r = static_cast<int>(kv.integer("optimize.star_r", c.topology.kind == "star" ? c.topology.r : 100));
  return c;
}

}  // namespace agegame::cli
