#pragma once

// Slotted Monte Carlo engine for version ages on a directed gossip graph.
//
// One slot: the event advances with probability p_e, the server samples the
// event with probability beta, and every directed edge fires independently
// with probability p. A node keeps the freshest version among its own copy,
// the server's copy (if it subscribes) and the copies of in-neighbors whose
// edge fired; all reads use the slot-t state. Ages are then bumped by the
// event indicator.

#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <thread>
#include <vector>

#include "agegame/core.hpp"

namespace agegame {

struct SimConfig {
  std::int64_t horizon = 10'000;
  std::int64_t replications = 200'000;
  std::uint64_t master_seed = 1;
  /// Slots discarded before time-averaging; defaults to horizon / 10.
  std::optional<std::int64_t> burn_in;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned workers = 0;

  std::int64_t effective_burn_in() const { return burn_in.value_or(horizon / 10); }

  void validate() const {
    if (horizon <= 0) throw ConfigError("sim.horizon must be positive");
    if (replications <= 0) throw ConfigError("sim.replications must be positive");
    const auto b = effective_burn_in();
    if (b < 0 || b >= horizon) throw ConfigError("sim.burn_in must lie in [0, horizon)");
  }
};

struct SimState {
  std::int64_t server_age = 0;
  std::vector<std::int64_t> node_ages;

  static SimState zeros(int n) { return {0, std::vector<std::int64_t>(n, 0)}; }
};

/// Random indicators realized in one slot. edge_fired follows the topology's
/// edge-list order.
struct SlotDraws {
  bool event = false;
  bool server_sample = false;
  std::vector<char> edge_fired;
};

using RandomStream = std::mt19937_64;

/// Independent stream for one replication, derived from (master_seed, index).
inline RandomStream replication_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return RandomStream(seq);
}

inline bool bernoulli(RandomStream& rng, double prob) {
  // 53-bit uniform in [0,1); prob == 1 always fires.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < prob;
}

inline void draw_slot(RandomStream& rng, const Topology& topo, const SystemParams& s, SlotDraws& out) {
  out.event = bernoulli(rng, s.p_e());
  out.server_sample = bernoulli(rng, s.beta());
  out.edge_fired.resize(topo.edges().size());
  for (auto& f : out.edge_fired) f = bernoulli(rng, s.p());
}

inline SlotDraws draw_slot(RandomStream& rng, const Topology& topo, const SystemParams& s) {
  SlotDraws d;
  draw_slot(rng, topo, s, d);
  return d;
}

/// Deterministic slot transition given the realized draws. `next` must not
/// alias `cur`.
inline void apply_slot(const SimState& cur, const Topology& topo, const SubscriptionProfile& profile,
                       const SlotDraws& draws, SimState& next) {
  const auto n = cur.node_ages.size();
  const std::int64_t bump = draws.event ? 1 : 0;
  next.server_age = (draws.server_sample ? 0 : cur.server_age) + bump;
  next.node_ages.resize(n);
  const auto& subscribed = profile.actions();
  for (std::size_t i = 0; i < n; ++i) {
    auto a = cur.node_ages[i];
    if (subscribed[i]) a = std::min(a, cur.server_age);
    next.node_ages[i] = a;
  }
  const auto& edges = topo.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!draws.edge_fired[e]) continue;
    auto& dst = next.node_ages[edges[e].second];
    dst = std::min(dst, cur.node_ages[edges[e].first]);
  }
  for (auto& a : next.node_ages) a += bump;

#ifndef NDEBUG
  assert(next.server_age == (draws.server_sample ? bump : cur.server_age + bump));
  for (std::size_t i = 0; i < n; ++i) {
    assert(next.node_ages[i] >= 0);
    assert(next.node_ages[i] <= cur.node_ages[i] + 1);
  }
#endif
}

/// One slot transition.
inline SimState step(const SimState& state, const Topology& topo, const SubscriptionProfile& profile,
                     const SystemParams& s, RandomStream& rng) {
  if (state.node_ages.size() != static_cast<std::size_t>(topo.size())) {
    throw ConfigError("state dimension does not match topology");
  }
  require_matching(topo, profile);
  SimState next;
  apply_slot(state, topo, profile, draw_slot(rng, topo, s), next);
  return next;
}

/// Nodes with no directed path from any subscriber. Their true mean age is
/// infinite.
inline std::vector<bool> unreachable_nodes(const Topology& topo, const SubscriptionProfile& profile) {
  require_matching(topo, profile);
  const int n = topo.size();
  std::vector<std::vector<int>> out(n);
  for (auto [i, j] : topo.edges()) out[i].push_back(j);
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  for (int i = 0; i < n; ++i) {
    if (profile.subscribes(i)) {
      seen[i] = true;
      q.push(i);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : out[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  std::vector<bool> unreachable(n);
  for (int i = 0; i < n; ++i) unreachable[i] = !seen[i];
  return unreachable;
}

/// Estimate of one node's long-run mean age.
struct NodeAge {
  double mean = 0.0;
  double ci_half_width = 0.0;
  bool divergent = false;

  /// The mean, or +inf when the node has no update path.
  double effective_mean() const { return divergent ? std::numeric_limits<double>::infinity() : mean; }
};

struct AgeEstimate {
  std::vector<double> mean;
  std::vector<double> ci_half_width;
  std::vector<bool> divergent;
  std::int64_t replications = 0;
  std::int64_t horizon = 0;
  std::int64_t burn_in = 0;

  NodeAge node(std::size_t i) const { return {mean.at(i), ci_half_width.at(i), divergent.at(i)}; }
  bool any_divergent() const {
    for (bool d : divergent)
      if (d) return true;
    return false;
  }
};

inline constexpr double kZ95 = 1.959963984540054;

namespace detail {

// Per-node time average of one replication, written to `out`.
inline void run_replication(const Topology& topo, const SubscriptionProfile& profile, const SystemParams& s,
                            const SimConfig& cfg, std::uint64_t index, double* out) {
  const int n = topo.size();
  auto rng = replication_stream(cfg.master_seed, index);
  SimState cur = SimState::zeros(n);
  SimState next = SimState::zeros(n);
  SlotDraws draws;
  std::vector<std::int64_t> sums(n, 0);
  const auto burn = cfg.effective_burn_in();
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    draw_slot(rng, topo, s, draws);
    apply_slot(cur, topo, profile, draws, next);
    std::swap(cur, next);
    if (t > burn) {
      for (int i = 0; i < n; ++i) sums[i] += cur.node_ages[i];
    }
  }
  const double samples = static_cast<double>(cfg.horizon - burn);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(sums[i]) / samples;
}

}  // namespace detail

/// Long-run mean age per node from independent replications started at all-zero
/// ages. Per-replication streams depend only on (master_seed, index) and the
/// reduction runs in index order, so the result is bit-identical for any
/// worker count.
inline AgeEstimate estimate_ages(const Topology& topo, const SubscriptionProfile& profile, const SystemParams& s,
                                 const SimConfig& cfg) {
  require_matching(topo, profile);
  cfg.validate();
  const int n = topo.size();
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<double> per_rep(reps * n);

  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
  std::atomic<std::size_t> next_index{0};
  auto worker = [&] {
    for (std::size_t r; (r = next_index.fetch_add(1, std::memory_order_relaxed)) < reps;) {
      detail::run_replication(topo, profile, s, cfg, r, per_rep.data() + r * n);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  AgeEstimate est;
  est.replications = cfg.replications;
  est.horizon = cfg.horizon;
  est.burn_in = cfg.effective_burn_in();
  est.mean.assign(n, 0.0);
  est.ci_half_width.assign(n, 0.0);
  est.divergent = unreachable_nodes(topo, profile);
  for (std::size_t r = 0; r < reps; ++r)
    for (int i = 0; i < n; ++i) est.mean[i] += per_rep[r * n + i];
  for (int i = 0; i < n; ++i) est.mean[i] /= static_cast<double>(reps);
  if (reps < 2) {
    est.ci_half_width.assign(n, std::numeric_limits<double>::infinity());
    return est;
  }
  for (int i = 0; i < n; ++i) {
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double d = per_rep[r * n + i] - est.mean[i];
      ss += d * d;
    }
    const double var = ss / static_cast<double>(reps - 1);
    est.ci_half_width[i] = kZ95 * std::sqrt(var / static_cast<double>(reps));
  }
  return est;
}

/// Mean age of `node` after it alone flips its subscription decision.
inline NodeAge alternate_age(int node, const Topology& topo, const SubscriptionProfile& profile,
                             const SystemParams& s, const SimConfig& cfg) {
  require_matching(topo, profile);
  if (node < 0 || node >= topo.size()) throw ConfigError("node index out of range");
  return estimate_ages(topo, profile.flipped(node), s, cfg).node(node);
}

}  // namespace agegame
