#pragma once

// AC-stability, equilibrium enumeration and the server's choice of sampling
// rate.
//
// A non-subscriber is stable when its mean age is strictly below L x_S; a
// subscriber is stable when dropping its subscription (everyone else fixed)
// would push its mean age to L x_S or beyond. Age evaluation is delegated to
// an oracle: the exact closed forms for lines, trees and stars, or the Monte
// Carlo engine for anything else.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "agegame/analytic.hpp"
#include "agegame/core.hpp"
#include "agegame/sim.hpp"

namespace agegame {

/// No candidate rate or profile satisfies the constraints.
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration refused because the node count exceeds the cap.
class CapExceeded : public std::runtime_error {
public:
  CapExceeded(int n, int cap)
      : std::runtime_error("enumeration over " + std::to_string(n) + " nodes exceeds the cap of " +
                           std::to_string(cap) + " nodes"),
        cap_(cap) {}
  int cap() const { return cap_; }

private:
  int cap_;
};

// ---------------------------------------------------------------------------
// Oracles

template <class O>
concept AgeOracle = requires(const O& o, const Topology& t, const SubscriptionProfile& a, const SystemParams& s) {
  { o.evaluate(t, a, s) } -> std::same_as<std::vector<NodeAge>>;
  { O::exact } -> std::convertible_to<bool>;
};

/// Closed-form ages; exact for out-forests and the star.
struct AnalyticOracle {
  static constexpr bool exact = true;

  std::vector<NodeAge> evaluate(const Topology& t, const SubscriptionProfile& a, const SystemParams& s) const {
    const auto ages = analytic_ages(t, a, s);
    std::vector<NodeAge> out(ages.size());
    for (std::size_t i = 0; i < ages.size(); ++i) {
      out[i] = std::isinf(ages[i]) ? NodeAge{ages[i], 0.0, true} : NodeAge{ages[i], 0.0, false};
    }
    return out;
  }
};

/// Monte Carlo ages with confidence half-widths.
struct SimulationOracle {
  static constexpr bool exact = false;
  SimConfig config;

  std::vector<NodeAge> evaluate(const Topology& t, const SubscriptionProfile& a, const SystemParams& s) const {
    const auto est = estimate_ages(t, a, s, config);
    std::vector<NodeAge> out(t.size());
    for (int i = 0; i < t.size(); ++i) out[i] = est.node(i);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Stability

enum class Stability { Stable, Unstable, Indeterminate };

inline std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct TolerancePolicy {
  /// Exact oracles: |age - L x_S| below this fraction of L x_S counts as a tie.
  double tie_relative = kIntegerSnap;
  /// Statistical oracles: a margin within ci_scale * half-width is Indeterminate.
  double ci_scale = 1.0;
};

struct NodeVerdict {
  Stability status = Stability::Indeterminate;
  bool subscriber = false;
  /// x_i for non-subscribers, the alternate age for subscribers.
  double age = 0.0;
  double ci_half_width = 0.0;
  double threshold = 0.0;
  /// Positive means comfortably stable: L x_S - x_i, or x~_i - L x_S.
  double margin = 0.0;
};

struct StabilityVerdict {
  std::vector<NodeVerdict> per_node;
  bool overall = false;

  std::size_t count(Stability s) const {
    return static_cast<std::size_t>(
        std::count_if(per_node.begin(), per_node.end(), [s](const NodeVerdict& v) { return v.status == s; }));
  }
};

namespace detail {

inline NodeVerdict judge(bool subscriber, const NodeAge& age, double threshold, bool exact,
                         const TolerancePolicy& tol) {
  NodeVerdict v;
  v.subscriber = subscriber;
  v.age = age.effective_mean();
  v.ci_half_width = age.ci_half_width;
  v.threshold = threshold;
  if (age.divergent) {
    // Infinite age violates any finite bound.
    v.margin = subscriber ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    v.status = subscriber ? Stability::Stable : Stability::Unstable;
    return v;
  }
  v.margin = subscriber ? age.mean - threshold : threshold - age.mean;
  const double band = exact ? tol.tie_relative * threshold : tol.ci_scale * age.ci_half_width;
  if (std::abs(age.mean - threshold) <= band) {
    if (!exact) {
      v.status = Stability::Indeterminate;
    } else {
      // Tie at the bound: x = L x_S violates the strict constraint.
      v.status = subscriber ? Stability::Stable : Stability::Unstable;
    }
    return v;
  }
  v.status = v.margin > 0 ? Stability::Stable : Stability::Unstable;
  return v;
}

}  // namespace detail

template <AgeOracle Oracle>
StabilityVerdict is_ac_stable(const Topology& topo, const SubscriptionProfile& profile, const SystemParams& s,
                              const Oracle& oracle, const TolerancePolicy& tol = {}) {
  require_matching(topo, profile);
  const double threshold = ac_threshold(s);
  const auto base = oracle.evaluate(topo, profile, s);
  StabilityVerdict out;
  out.per_node.resize(topo.size());
  for (int i = 0; i < topo.size(); ++i) {
    const bool sub = profile.subscribes(i);
    const NodeAge age = sub ? oracle.evaluate(topo, profile.flipped(i), s)[i] : base[i];
    out.per_node[i] = detail::judge(sub, age, threshold, Oracle::exact, tol);
  }
  out.overall = out.count(Stability::Stable) == out.per_node.size();
  return out;
}

struct StableProfile {
  SubscriptionProfile profile;
  StabilityVerdict verdict;
};

inline constexpr int kDefaultEnumerationCap = 16;

/// Every AC-stable profile, in ascending lexicographic order of the action
/// vector.
template <AgeOracle Oracle>
std::vector<StableProfile> enumerate_stable_profiles(const Topology& topo, const SystemParams& s, const Oracle& oracle,
                                                     int cap = kDefaultEnumerationCap,
                                                     const TolerancePolicy& tol = {}) {
  const int n = topo.size();
  if (n > cap || n > 62) throw CapExceeded(n, std::min(cap, 62));
  std::vector<StableProfile> out;
  const double threshold = ac_threshold(s);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    auto profile = SubscriptionProfile::from_code(n, code);
    // Cheap rejection on non-subscribers before paying for the flips.
    const auto base = oracle.evaluate(topo, profile, s);
    bool hopeless = false;
    for (int i = 0; i < n && !hopeless; ++i) {
      if (!profile.subscribes(i)) {
        hopeless = detail::judge(false, base[i], threshold, Oracle::exact, tol).status != Stability::Stable;
      }
    }
    if (hopeless) continue;
    auto verdict = is_ac_stable(topo, profile, s, oracle, tol);
    if (verdict.overall) out.push_back({std::move(profile), std::move(verdict)});
  }
  return out;
}

struct PreferredProfile {
  SubscriptionProfile profile;
  double f_s = 0.0;
};

/// Profile with the largest subscriber fraction; ties go to the
/// lexicographically smallest action vector.
inline PreferredProfile server_preferred(const std::vector<StableProfile>& stable) {
  if (stable.empty()) throw InfeasibleError("no AC-stable profile");
  const StableProfile* best = &stable.front();
  for (const auto& sp : stable) {
    const auto c = sp.profile.subscriber_count();
    const auto b = best->profile.subscriber_count();
    if (c > b || (c == b && sp.profile < best->profile)) best = &sp;
  }
  return {best->profile, best->profile.subscription_fraction()};
}

// ---------------------------------------------------------------------------
// Canonical profiles for the closed-form topologies

/// Subscribers at 0, K, 2K, ... on an n-node line.
inline SubscriptionProfile line_periodic_profile(int n, std::int64_t K) {
  std::vector<bool> a(n);
  for (int i = 0; i < n; ++i) a[i] = i % K == 0;
  return SubscriptionProfile(std::move(a));
}

/// Every K-th level of a tree subscribes, starting at the root.
inline SubscriptionProfile tree_level_profile(const Topology& tree, std::int64_t K) {
  std::vector<bool> a(tree.size());
  for (int i = 0; i < tree.size(); ++i) a[i] = tree.tree_level(i) % K == 0;
  return SubscriptionProfile(std::move(a));
}

// ---------------------------------------------------------------------------
// Sampling cost and server utility

struct QuadraticCost {
  double c0 = 0.0;
};
struct LinearCost {
  double c0 = 0.0;
};
/// Piecewise-linear through (beta, cost) knots, clamped outside.
struct TableCost {
  std::vector<std::pair<double, double>> knots;
};

class CostFunction {
public:
  using Kind = std::variant<QuadraticCost, LinearCost, TableCost>;

  CostFunction() : kind_(QuadraticCost{0.0}) {}
  explicit CostFunction(Kind kind) : kind_(std::move(kind)) {
    if (auto* t = std::get_if<TableCost>(&kind_)) {
      if (t->knots.empty()) throw ConfigError("cost table needs at least one knot");
      std::sort(t->knots.begin(), t->knots.end());
    }
    if (auto* q = std::get_if<QuadraticCost>(&kind_); q && q->c0 < 0) throw ConfigError("cost.c0 must be >= 0");
    if (auto* l = std::get_if<LinearCost>(&kind_); l && l->c0 < 0) throw ConfigError("cost.c0 must be >= 0");
    constexpr int kSamples = 1000;
    double prev = (*this)(1.0 / kSamples);
    for (int i = 2; i <= kSamples; ++i) {
      const double cur = (*this)(static_cast<double>(i) / kSamples);
      if (cur < prev) throw ConfigError("sampling cost must be non-decreasing on (0,1]");
      prev = cur;
    }
  }

  static CostFunction quadratic(double c0) { return CostFunction(QuadraticCost{c0}); }
  static CostFunction linear(double c0) { return CostFunction(LinearCost{c0}); }
  static CostFunction zero() { return quadratic(0.0); }

  double operator()(double beta) const {
    struct Eval {
      double b;
      double operator()(const QuadraticCost& q) const { return q.c0 * b * b; }
      double operator()(const LinearCost& l) const { return l.c0 * b; }
      double operator()(const TableCost& t) const {
        const auto& k = t.knots;
        if (b <= k.front().first) return k.front().second;
        if (b >= k.back().first) return k.back().second;
        auto hi = std::upper_bound(k.begin(), k.end(), b, [](double x, const auto& kn) { return x < kn.first; });
        auto lo = std::prev(hi);
        const double w = (b - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
      }
    };
    return std::visit(Eval{beta}, kind_);
  }

  const Kind& kind() const { return kind_; }

private:
  Kind kind_;
};

inline double server_utility(double f_s, double beta, const CostFunction& cost) { return f_s - cost(beta); }

// ---------------------------------------------------------------------------
// Server rate optimization

struct OptimizeLine {};
struct OptimizeTree {
  int r = 2;
};
struct OptimizeStar {
  int r = 1;
};
/// Arbitrary graph on a user-supplied beta grid, evaluated by enumeration.
struct OptimizeGeneral {
  Topology topology;
  std::vector<double> grid;
};

using OptimizeTarget = std::variant<OptimizeLine, OptimizeTree, OptimizeStar, OptimizeGeneral>;

struct OptimizeOptions {
  /// Stand-in for beta_0 = 0 in the star candidate set.
  double beta_min = 1e-3;
  std::int64_t k_min = 1;
  /// Defaults to ceil(10 p (L-1) (1/beta_min + 1)).
  std::optional<std::int64_t> k_max;
  int enumeration_cap = kDefaultEnumerationCap;
};

struct Candidate {
  double beta = 0.0;
  /// Line/tree: spacing K. Star: peripheral subscriber count. General: subscriber count.
  std::int64_t k = 0;
  double f_s = 0.0;
  double utility = 0.0;
};

struct EquilibriumReport {
  double beta_star = 0.0;
  std::int64_t k = 0;
  double f_s = 0.0;
  double utility = 0.0;
  /// Equilibrium profile when it is finite and materialized (star, general,
  /// one line cell).
  std::optional<SubscriptionProfile> profile;
  std::vector<Candidate> candidates;
  std::size_t argmax = 0;
};

namespace detail {

inline EquilibriumReport finish(std::vector<Candidate> cands, const std::string& what) {
  if (cands.empty()) throw InfeasibleError("no feasible candidate rate in (0,1] for " + what);
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].utility > cands[best].utility) best = i;
  EquilibriumReport rep;
  rep.beta_star = cands[best].beta;
  rep.k = cands[best].k;
  rep.f_s = cands[best].f_s;
  rep.utility = cands[best].utility;
  rep.argmax = best;
  rep.candidates = std::move(cands);
  return rep;
}

inline std::int64_t default_k_max(const SystemParams& s, double beta_min) {
  return static_cast<std::int64_t>(std::ceil(10.0 * s.p() * (s.L() - 1.0) * (1.0 / beta_min + 1.0)));
}

}  // namespace detail

/// The server's utility-maximizing rate among the critical rates of the
/// target topology. `base` supplies p_e, p and L; its beta is ignored.
template <AgeOracle Oracle = AnalyticOracle>
EquilibriumReport optimize_beta(const OptimizeTarget& target, const SystemParams& base, const CostFunction& cost,
                                const OptimizeOptions& opt = {}, const Oracle& oracle = {}) {
  if (!(opt.beta_min > 0.0 && opt.beta_min <= 1.0)) throw ConfigError("beta_min must lie in (0,1]");
  std::vector<Candidate> cands;

  if (std::holds_alternative<OptimizeLine>(target) || std::holds_alternative<OptimizeTree>(target)) {
    const auto* tree = std::get_if<OptimizeTree>(&target);
    if (tree && tree->r < 2) throw ConfigError("tree branching factor r must be >= 2");
    const auto k_lo = std::max<std::int64_t>(1, opt.k_min);
    const auto k_hi = opt.k_max.value_or(detail::default_k_max(base, opt.beta_min));
    for (std::int64_t K = k_lo; K <= k_hi; ++K) {
      const auto rate = line_beta_star(K, base);
      if (!rate.in_unit_interval()) continue;
      const auto s = base.with_beta(rate.value());
      const double f = tree ? tree_fs(s, tree->r) : line_fs(s);
      cands.push_back({rate.value(), line_k_star(s), f, server_utility(f, rate.value(), cost)});
    }
    auto rep = detail::finish(std::move(cands), tree ? "tree" : "line");
    if (!tree && rep.k <= 4096) rep.profile = line_periodic_profile(static_cast<int>(rep.k), rep.k);
    return rep;
  }

  if (const auto* star = std::get_if<OptimizeStar>(&target)) {
    const auto t = star_thresholds(base, star->r);
    for (int k = 1; k <= star->r + 1; ++k) {
      double beta = opt.beta_min;
      if (k > 1) {
        const auto& rate = t.at(k - 1);
        if (!rate.in_unit_interval()) continue;
        beta = rate.value();
      }
      const auto reg = star_regime(beta, base, star->r);
      cands.push_back({beta, static_cast<std::int64_t>(reg.profile.subscriber_count()), reg.f_s,
                       server_utility(reg.f_s, beta, cost)});
    }
    auto rep = detail::finish(std::move(cands), "star");
    rep.profile = star_regime(rep.beta_star, base, star->r).profile;
    return rep;
  }

  const auto& general = std::get<OptimizeGeneral>(target);
  if (general.grid.empty()) throw ConfigError("general topology needs a beta grid");
  std::vector<SubscriptionProfile> profiles;
  for (double beta : general.grid) {
    const auto s = base.with_beta(beta);
    const auto stable = enumerate_stable_profiles(general.topology, s, oracle, opt.enumeration_cap);
    if (stable.empty()) continue;
    const auto pref = server_preferred(stable);
    cands.push_back({beta, static_cast<std::int64_t>(pref.profile.subscriber_count()), pref.f_s,
                     server_utility(pref.f_s, beta, cost)});
    profiles.push_back(pref.profile);
  }
  auto rep = detail::finish(std::move(cands), "general topology");
  rep.profile = profiles[rep.argmax];
  return rep;
}

}  // namespace agegame
