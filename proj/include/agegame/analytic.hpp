#pragma once

// Closed forms for directed lines, r-ary out-trees and the star.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "agegame/core.hpp"

namespace agegame {

/// Relative slack within which a computed quantity is snapped to the nearest
/// integer. Boundary ties go toward subscribing.
inline constexpr double kIntegerSnap = 1e-12;

/// Mean age k hops downstream of the nearest subscriber on a directed path.
inline double line_node_age(std::int64_t k, const SystemParams& s) {
  if (k < 0) throw ConfigError("hop distance must be non-negative");
  return subscriber_age(s) + static_cast<double>(k) * s.p_e() / s.p();
}

/// p(L-1)(1/beta + 1): the real-valued subscriber spacing before rounding up.
inline double line_spacing_bound(const SystemParams& s) {
  return s.p() * (s.L() - 1.0) * (1.0 / s.beta() + 1.0);
}

/// Critical subscriber spacing K on a directed line: the smallest K with
/// x_{K-1} < L x_S <= x_K. L = 1 (or any bound <= 1) forces every node to
/// subscribe, K = 1.
inline std::int64_t line_k_star(const SystemParams& s) {
  const double v = line_spacing_bound(s);
  if (!std::isfinite(v) || v > 1e15) throw std::overflow_error("critical spacing overflows");
  const double nearest = std::round(v);
  double k = std::abs(v - nearest) <= kIntegerSnap * std::max(1.0, nearest) ? nearest : std::ceil(v);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(k));
}

inline double line_fs(const SystemParams& s) { return 1.0 / static_cast<double>(line_k_star(s)); }

/// Minimal beta sustaining spacing K, or +inf when no finite beta does.
inline ExtendedRate line_beta_star(std::int64_t K, double p, double L) {
  if (K < 1) throw ConfigError("K must be >= 1");
  return ExtendedRate::reciprocal(static_cast<double>(K) / (p * (L - 1.0)) - 1.0);
}

inline ExtendedRate line_beta_star(std::int64_t K, const SystemParams& s) {
  return line_beta_star(K, s.p(), s.L());
}

/// Subscriber fraction of an infinite r-ary out-tree: every K-th level subscribes.
inline double tree_fs(const SystemParams& s, int r) {
  if (r < 2) throw ConfigError("tree branching factor r must be >= 2");
  const auto K = line_k_star(s);
  return (r - 1.0) / (std::pow(static_cast<double>(r), static_cast<double>(K)) - 1.0);
}

// ---------------------------------------------------------------------------
// Star

/// Probability that at least one of k independent edges fires.
inline double any_fires(double p, int k) { return k == 1 ? p : 1.0 - std::pow(1.0 - p, k); }

struct StarThresholds {
  /// beta_k for k = 1..r (index 0 holds beta_1).
  std::vector<ExtendedRate> beta_k;
  ExtendedRate beta_c = ExtendedRate::infinite(InfiniteReason::NonpositiveDenominator);
  ExtendedRate beta_r = ExtendedRate::infinite(InfiniteReason::NonpositiveDenominator);

  int r() const { return static_cast<int>(beta_k.size()); }
  /// beta_k with beta_0 = 0.
  double lower(int k) const { return k == 0 ? 0.0 : beta_k.at(k - 1).value(); }
  const ExtendedRate& at(int k) const { return beta_k.at(k - 1); }
};

/// All critical rates of a star with r spokes. Nonpositive denominators map
/// to +inf (the corresponding condition holds for every beta).
inline StarThresholds star_thresholds(double p, double L, int r) {
  if (r < 1) throw ConfigError("star needs r >= 1");
  StarThresholds t;
  const double slack = L - 1.0;
  for (int k = 1; k < r; ++k) {
    t.beta_k.push_back(ExtendedRate::reciprocal((1.0 / any_fires(p, k) + 1.0 / p) / slack - 1.0));
  }
  t.beta_r = ExtendedRate::reciprocal(1.0 / (any_fires(p, r) * slack) - 1.0);
  t.beta_k.push_back(t.beta_r);
  t.beta_c = ExtendedRate::reciprocal(1.0 / (p * slack) - 1.0);
  return t;
}

inline StarThresholds star_thresholds(const SystemParams& s, int r) { return star_thresholds(s.p(), s.L(), r); }

enum class StarRegime { CenterOnly, PeripheralK, AllPeripherals, AllSubscribe };

inline std::string to_string(StarRegime r) {
  switch (r) {
    case StarRegime::CenterOnly: return "center_only";
    case StarRegime::PeripheralK: return "peripheral_k";
    case StarRegime::AllPeripherals: return "all_peripherals";
    case StarRegime::AllSubscribe: return "all_subscribe";
  }
  return "?";
}

struct RegimeReport {
  double beta = 0.0;
  StarRegime regime = StarRegime::PeripheralK;
  /// Peripheral subscribers in the server-preferred profile.
  int k = 0;
  SubscriptionProfile profile;
  double f_s = 0.0;
  /// Whether the center-only profile is also stable at this beta.
  bool center_only_stable = false;
};

/// Star profile with the center's action and k subscribing spokes. The chosen
/// spokes are the last k, the lexicographically smallest such vector.
inline SubscriptionProfile star_profile(int r, bool center, int k) {
  std::vector<bool> a(r + 1, false);
  a[0] = center;
  for (int j = r - k + 1; j <= r; ++j) a[j] = true;
  return SubscriptionProfile(std::move(a));
}

/// Server-preferred equilibrium of a star at rate beta.
inline RegimeReport star_regime(double beta, double p, double L, int r) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0,1]");
  const auto t = star_thresholds(p, L, r);
  RegimeReport rep;
  rep.beta = beta;
  rep.center_only_stable = !reached(beta, t.beta_c);
  if (reached(beta, t.beta_r)) {
    rep.regime = StarRegime::AllSubscribe;
    rep.k = r;
    rep.profile = SubscriptionProfile(static_cast<std::size_t>(r + 1), true);
    rep.f_s = 1.0;
    return rep;
  }
  int k = 1;
  while (k < r && reached(beta, t.at(k))) ++k;
  rep.k = k;
  rep.regime = k == r ? StarRegime::AllPeripherals : StarRegime::PeripheralK;
  rep.profile = star_profile(r, false, k);
  rep.f_s = static_cast<double>(k) / (r + 1.0);
  return rep;
}

inline RegimeReport star_regime(double beta, const SystemParams& s, int r) {
  return star_regime(beta, s.p(), s.L(), r);
}

// ---------------------------------------------------------------------------
// Exact mean ages for an arbitrary profile

/// True when every node has at most one in-neighbor and the graph is acyclic
/// (lines, trees and other out-forests).
inline bool is_out_forest(const Topology& topo) {
  const int n = topo.size();
  for (int i = 0; i < n; ++i)
    if (topo.in_neighbors(i).size() > 1) return false;
  // Walk up from every node; a cycle would revisit a node.
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  for (int i = 0; i < n; ++i) {
    std::vector<int> chain;
    int u = i;
    while (u >= 0 && state[u] == 0) {
      state[u] = 1;
      chain.push_back(u);
      const auto& in = topo.in_neighbors(u);
      u = in.empty() ? -1 : in.front();
    }
    if (u >= 0 && state[u] == 1) return false;
    for (int v : chain) state[v] = 2;
  }
  return true;
}

/// Whether analytic_ages can evaluate this topology.
inline bool has_closed_form(const Topology& topo) { return topo.is_star() || is_out_forest(topo); }

/// Exact long-run mean age of every node under `profile`; +inf for nodes with
/// no update path. Defined for out-forests and the star.
inline std::vector<double> analytic_ages(const Topology& topo, const SubscriptionProfile& profile,
                                         const SystemParams& s) {
  require_matching(topo, profile);
  const int n = topo.size();
  const double inf = std::numeric_limits<double>::infinity();
  const double xs = subscriber_age(s);
  const double hop = s.p_e() / s.p();
  std::vector<double> age(n, inf);

  if (topo.is_star()) {
    const int r = n - 1;
    int k = 0;
    for (int j = 1; j <= r; ++j) k += profile.subscribes(j);
    double center = inf;
    if (profile.subscribes(0)) {
      center = xs;
    } else if (k > 0) {
      center = xs + s.p_e() / any_fires(s.p(), k);
    }
    age[0] = center;
    for (int j = 1; j <= r; ++j) age[j] = profile.subscribes(j) ? xs : center + hop;
    return age;
  }

  if (!is_out_forest(topo)) {
    throw ConfigError("no closed form for this topology; use the simulation oracle");
  }
  // Resolve each node by walking up to the nearest subscriber or a root.
  std::vector<char> done(n, 0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> chain;
    int u = i;
    double base = inf;
    while (true) {
      if (done[u]) {
        base = age[u];
        break;
      }
      if (profile.subscribes(u)) {
        age[u] = xs;
        done[u] = 1;
        base = xs;
        break;
      }
      chain.push_back(u);
      const auto& in = topo.in_neighbors(u);
      if (in.empty()) break;
      u = in.front();
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      base += hop;
      age[*it] = base;
      done[*it] = 1;
    }
  }
  return age;
}

}  // namespace agegame
