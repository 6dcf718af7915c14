#pragma once

// Subcommands of the agegame tool. Each returns a table plus an exit code;
// the caller decides where the table goes.
//
// CSV schemas:
//   analyze     node_or_k,value,formula_id,reason
//   simulate    node,subscribes,mean,ci_half_width,divergent
//   equilibria  profile,subscribers,f_s,preferred
//   optimize    topology,candidate_beta,k,f_s,utility,argmax
//   sweep       beta,k,f_s,utility,regime

#include <cstdint>
#include <string>
#include <vector>

#include "agegame/analytic.hpp"
#include "agegame/cli/config.hpp"
#include "agegame/cli/table.hpp"
#include "agegame/core.hpp"
#include "agegame/equilibrium.hpp"
#include "agegame/sim.hpp"

namespace agegame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitCap = 4;

struct Outcome {
  Table table;
  int exit_code = kExitOk;
  std::vector<std::string> notes;
};

inline void add_rate(Table& t, const std::string& label, const ExtendedRate& rate, const std::string& formula) {
  t.add({label, fmt(rate.value()), formula, reason_token(rate)});
}

inline Outcome cmd_analyze(const RunConfig& c) {
  Outcome out;
  out.table.header = {"node_or_k", "value", "formula_id", "reason"};
  auto& t = out.table;
  const auto& s = c.params;
  const auto& kind = c.topology.kind;
  if (kind == "general") {
    out.exit_code = kExitConfig;
    out.notes.push_back("no closed form for general topologies; run 'simulate' or 'equilibria' instead");
    return out;
  }
  t.add({"x_R", fmt(server_age(s)), "server_age", ""});
  t.add({"x_S", fmt(subscriber_age(s)), "subscriber_age", ""});
  t.add({"L*x_S", fmt(ac_threshold(s)), "ac_threshold", ""});

  if (kind == "line" || kind == "tree") {
    const auto K = line_k_star(s);
    for (std::int64_t k = 0; k < K; ++k) t.add({fmt(k), fmt(line_node_age(k, s)), "line_node_age", ""});
    t.add({"K", fmt(K), "line_k_star", ""});
    if (kind == "line") {
      t.add({"F_S", fmt(line_fs(s)), "line_fs", ""});
    } else {
      t.add({"F_S", fmt(tree_fs(s, c.topology.r)), "tree_fs", ""});
    }
    add_rate(t, "beta_star(K)", line_beta_star(K, s), "line_beta_star");
    return out;
  }

  const int r = c.topology.r;
  const auto th = star_thresholds(s, r);
  for (int k = 1; k <= r; ++k) add_rate(t, "beta_" + std::to_string(k), th.at(k), "star_beta_k");
  add_rate(t, "beta_c", th.beta_c, "star_beta_c");
  add_rate(t, "beta_r", th.beta_r, "star_beta_r");
  t.add({"x_NP", fmt(subscriber_age(s) + s.p_e() / s.p()), "star_peripheral_age", ""});
  t.add({"x~_0", fmt(subscriber_age(s) + s.p_e() / any_fires(s.p(), r)), "star_center_alternate_age", ""});
  const auto reg = star_regime(s.beta(), s, r);
  t.add({"regime", fmt(reg.k), "star_regime", to_string(reg.regime)});
  t.add({"F_S", fmt(reg.f_s), "star_fs", ""});
  t.add({"center_only_stable", fmt(reg.center_only_stable), "star_beta_c", ""});
  return out;
}

/// The analytic equilibrium pattern for tagged topologies.
inline SubscriptionProfile derived_profile(const RunConfig& c) {
  const auto& topo = c.topology.topology;
  if (c.topology.kind == "line") return line_periodic_profile(topo.size(), line_k_star(c.params));
  if (c.topology.kind == "tree") return tree_level_profile(topo, line_k_star(c.params));
  if (c.topology.kind == "star") return star_regime(c.params.beta(), c.params, c.topology.r).profile;
  throw ConfigError("general topology needs profile.actions");
}

inline Outcome cmd_simulate(const RunConfig& c) {
  Outcome out;
  out.table.header = {"node", "subscribes", "mean", "ci_half_width", "divergent"};
  const auto& topo = c.topology.topology;
  const auto profile = c.profile ? *c.profile : derived_profile(c);
  const auto est = estimate_ages(topo, profile, c.params, c.sim);
  for (int i = 0; i < topo.size(); ++i) {
    out.table.add({fmt(i), fmt(profile.subscribes(i)), fmt(est.mean[i]), fmt(est.ci_half_width[i]),
                   fmt(static_cast<bool>(est.divergent[i]))});
  }
  if (est.any_divergent()) {
    out.exit_code = kExitInfeasible;
    out.notes.push_back("some nodes have no update path; their mean age diverges");
  }
  return out;
}

inline bool use_analytic(const RunConfig& c) {
  const bool closed = has_closed_form(c.topology.topology);
  if (c.oracle == "analytic") {
    if (!closed) throw ConfigError("equilibria.oracle=analytic needs a line, tree, star or out-forest");
    return true;
  }
  return c.oracle == "auto" && closed;
}

inline std::vector<StableProfile> stable_profiles(const RunConfig& c, const SystemParams& s) {
  if (use_analytic(c)) return enumerate_stable_profiles(c.topology.topology, s, AnalyticOracle{}, c.cap);
  return enumerate_stable_profiles(c.topology.topology, s, SimulationOracle{c.sim}, c.cap);
}

inline Outcome cmd_equilibria(const RunConfig& c) {
  Outcome out;
  out.table.header = {"profile", "subscribers", "f_s", "preferred"};
  std::vector<StableProfile> stable;
  try {
    stable = stable_profiles(c, c.params);
  } catch (const CapExceeded& e) {
    out.exit_code = kExitCap;
    out.notes.push_back(e.what());
    return out;
  }
  if (stable.empty()) {
    out.exit_code = kExitInfeasible;
    out.notes.push_back("no AC-stable profile");
    return out;
  }
  const auto pref = server_preferred(stable);
  for (const auto& sp : stable) {
    out.table.add({sp.profile.to_string(), fmt(sp.profile.subscriber_count()),
                   fmt(sp.profile.subscription_fraction()), fmt(sp.profile == pref.profile)});
  }
  return out;
}

inline void append_report(Table& t, const std::string& name, const EquilibriumReport& rep) {
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    const auto& cd = rep.candidates[i];
    t.add({name, fmt(cd.beta), fmt(cd.k), fmt(cd.f_s), fmt(cd.utility), fmt(i == rep.argmax)});
  }
}

inline EquilibriumReport optimize_one(const RunConfig& c, const OptimizeTarget& target) {
  if (std::holds_alternative<OptimizeGeneral>(target) && !use_analytic(c)) {
    return optimize_beta(target, c.params, c.cost, c.optimize, SimulationOracle{c.sim});
  }
  return optimize_beta(target, c.params, c.cost, c.optimize, AnalyticOracle{});
}

inline Outcome cmd_optimize(const RunConfig& c) {
  Outcome out;
  out.table.header = {"topology", "candidate_beta", "k", "f_s", "utility", "argmax"};
  std::vector<std::pair<std::string, OptimizeTarget>> targets;
  if (c.compare) {
    targets.emplace_back("line", OptimizeLine{});
    targets.emplace_back("tree", OptimizeTree{c.tree_r});
    targets.emplace_back("star", OptimizeStar{c.star_r});
  } else if (c.topology.kind == "line") {
    targets.emplace_back("line", OptimizeLine{});
  } else if (c.topology.kind == "tree") {
    targets.emplace_back("tree", OptimizeTree{c.topology.r});
  } else if (c.topology.kind == "star") {
    targets.emplace_back("star", OptimizeStar{c.topology.r});
  } else {
    if (c.grid.empty()) throw ConfigError("missing required key 'optimize.grid'");
    targets.emplace_back("general", OptimizeGeneral{c.topology.topology, c.grid});
  }
  for (const auto& [name, target] : targets) {
    try {
      const auto rep = optimize_one(c, target);
      append_report(out.table, name, rep);
      out.notes.push_back(name + ": beta*=" + fmt(rep.beta_star) + " F_S=" + fmt(rep.f_s) +
                          " utility=" + fmt(rep.utility));
    } catch (const InfeasibleError& e) {
      out.exit_code = kExitInfeasible;
      out.notes.push_back(name + ": " + e.what());
    } catch (const CapExceeded& e) {
      out.exit_code = kExitCap;
      out.notes.push_back(name + ": " + e.what());
    }
  }
  return out;
}

inline Outcome cmd_sweep(const RunConfig& c) {
  if (!c.sweep) throw ConfigError("missing required key 'sweep.from'");
  Outcome out;
  out.table.header = {"beta", "k", "f_s", "utility", "regime"};
  const auto& sw = *c.sweep;
  for (std::int64_t i = 0; i < sw.steps; ++i) {
    const double beta = sw.steps == 1 ? sw.from : sw.from + (sw.to - sw.from) * static_cast<double>(i) /
                                                                static_cast<double>(sw.steps - 1);
    const auto s = c.params.with_beta(beta);
    std::int64_t k = 0;
    double f = 0.0;
    std::string regime;
    if (c.topology.kind == "line" || c.topology.kind == "tree") {
      k = line_k_star(s);
      f = c.topology.kind == "line" ? line_fs(s) : tree_fs(s, c.topology.r);
      regime = "spacing";
    } else if (c.topology.kind == "star") {
      const auto reg = star_regime(beta, s, c.topology.r);
      k = reg.k;
      f = reg.f_s;
      regime = to_string(reg.regime);
    } else {
      try {
        const auto stable = stable_profiles(c, s);
        if (stable.empty()) {
          out.table.add({fmt(beta), "0", "nan", "nan", "none"});
          out.exit_code = kExitInfeasible;
          continue;
        }
        const auto pref = server_preferred(stable);
        k = static_cast<std::int64_t>(pref.profile.subscriber_count());
        f = pref.f_s;
        regime = pref.profile.to_string();
      } catch (const CapExceeded& e) {
        out.exit_code = kExitCap;
        out.notes.push_back(e.what());
        return out;
      }
    }
    out.table.add({fmt(beta), fmt(k), fmt(f), fmt(server_utility(f, beta, c.cost)), regime});
  }
  return out;
}

inline Outcome run_command(const std::string& name, const RunConfig& c) {
  if (name == "analyze") return cmd_analyze(c);
  if (name == "simulate") return cmd_simulate(c);
  if (name == "equilibria") return cmd_equilibria(c);
  if (name == "optimize") return cmd_optimize(c);
  if (name == "sweep") return cmd_sweep(c);
  throw ConfigError("unknown subcommand '" + name + "'");
}

inline std::string render(const std::string& command, const Outcome& out, Format format) {
  if (format == Format::Csv) return out.table.to_csv();
  nlohmann::ordered_json j;
  j["command"] = command;
  j["exit_code"] = out.exit_code;
  j["columns"] = out.table.header;
  j["rows"] = out.table.to_json();
  j["notes"] = out.notes;
  return j.dump(2) + "\n";
}

}  // namespace agegame::cli
