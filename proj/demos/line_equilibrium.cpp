// Ages along a directed line and the server's best sampling rate, using the
// parameters L = 10, p = 0.2, beta = 0.6, p_e = 0.3.

#include <chrono>
#include <cstdio>

#include "agegame/analytic.hpp"
#include "agegame/equilibrium.hpp"
#include "agegame/sim.hpp"

int main() {
  using namespace agegame;
  const SystemParams s{0.3, 0.6, 0.2, 10.0};
  const auto K = line_k_star(s);
  std::printf("K = %lld, F_S = %.4f\n", static_cast<long long>(K), line_fs(s));

  const auto topo = Topology::line(static_cast<int>(2 * K));
  const auto profile = line_periodic_profile(topo.size(), K);
  SimConfig cfg;
  cfg.horizon = 10'000;
  cfg.replications = 2'000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = estimate_ages(topo, profile, s, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%4s %10s %10s %10s\n", "node", "analytic", "simulated", "ci95");
  for (int i = 0; i < topo.size(); ++i) {
    std::printf("%4d %10.4f %10.4f %10.4f\n", i, line_node_age(i % K, s), est.mean[i], est.ci_half_width[i]);
  }
  std::printf("(%lld replications x %lld slots in %.2fs)\n", static_cast<long long>(cfg.replications),
              static_cast<long long>(cfg.horizon), secs);

  const auto rep = optimize_beta(OptimizeLine{}, s, CostFunction::quadratic(80.0));
  std::printf("cost 80*beta^2: beta* = %.6f, K = %lld, utility = %.6f\n", rep.beta_star,
              static_cast<long long>(rep.k), rep.utility);
}
