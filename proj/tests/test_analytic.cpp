#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "agegame/analytic.hpp"
#include "agegame/equilibrium.hpp"
#include "agegame/sim.hpp"
#include "stat_band.hpp"

using namespace agegame;
using agegame::testing_support::familywise_band;

namespace {

const SystemParams kBase{0.3, 0.6, 0.2, 10.0};

}  // namespace

TEST(LineNodeAge, Examples) {
  EXPECT_DOUBLE_EQ(line_node_age(0, kBase), 0.8);
  EXPECT_NEAR(line_node_age(4, kBase), 6.8, 1e-12);
  EXPECT_NEAR(line_node_age(5, kBase), 8.3, 1e-12);
  EXPECT_THROW(line_node_age(-1, kBase), ConfigError);
}

TEST(LineKStar, Examples) {
  EXPECT_EQ(line_k_star(kBase), 5);
  EXPECT_EQ(line_k_star({0.3, 1.0, 0.2, 10.0}), 4);
  EXPECT_EQ(line_k_star({0.3, 0.5, 0.5, 2.0}), 2);
  // L = 1: every node must subscribe.
  EXPECT_EQ(line_k_star({0.3, 0.5, 0.5, 1.0}), 1);
}

TEST(LineKStar, ExactIntegerBoundaryKeepsK) {
  // p(L-1)(1/beta+1) = 0.5 * 2 * 3 = 3 exactly.
  EXPECT_EQ(line_k_star({0.2, 0.5, 0.5, 3.0}), 3);
}

TEST(LineFs, Examples) {
  EXPECT_DOUBLE_EQ(line_fs(kBase), 0.2);
  EXPECT_DOUBLE_EQ(line_fs({0.3, 0.5, 0.5, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(line_fs({0.3, 0.5, 0.5, 2.0}), 0.5);
}

TEST(LineBetaStar, Examples) {
  const auto b5 = line_beta_star(5, kBase);
  ASSERT_TRUE(b5.is_finite());
  EXPECT_NEAR(b5.value(), 0.5625, 1e-12);
  EXPECT_EQ(line_k_star(kBase.with_beta(b5.value())), 5);

  EXPECT_FALSE(line_beta_star(1, kBase).is_finite());

  const auto b4 = line_beta_star(4, kBase);
  EXPECT_NEAR(b4.value(), 9.0 / 11.0, 1e-12);
  EXPECT_EQ(line_k_star(kBase.with_beta(0.8182)), 4);
  EXPECT_THROW(line_beta_star(0, kBase), ConfigError);
}

TEST(LineBetaStar, StaircaseRoundTrip) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double p = 0.02 + 0.97 * u(gen);
    const double L = 1.0 + 30.0 * u(gen);
    const SystemParams base{0.3, 0.5, p, L};
    for (std::int64_t K = 2; K <= 60; ++K) {
      const auto rate = line_beta_star(K, base);
      if (!rate.in_unit_interval() || rate.value() <= 2e-6) continue;
      ASSERT_EQ(line_k_star(base.with_beta(rate.value())), K) << "p=" << p << " L=" << L;
      ASSERT_EQ(line_k_star(base.with_beta(rate.value() - 1e-6)), K + 1) << "p=" << p << " L=" << L;
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(LineKStar, MonotoneInBeta) {
  for (double p : {0.1, 0.4, 0.9}) {
    for (double L : {1.5, 4.0, 20.0}) {
      std::int64_t prev_k = std::numeric_limits<std::int64_t>::max();
      double prev_f = 0.0;
      for (int i = 1; i <= 500; ++i) {
        const SystemParams s{0.3, i / 500.0, p, L};
        EXPECT_LE(line_k_star(s), prev_k);
        EXPECT_GE(line_fs(s), prev_f);
        prev_k = line_k_star(s);
        prev_f = line_fs(s);
      }
    }
  }
}

TEST(TreeFs, Examples) {
  EXPECT_NEAR(tree_fs(kBase, 2), 1.0 / 31.0, 1e-15);
  EXPECT_DOUBLE_EQ(tree_fs({0.3, 0.5, 0.5, 1.0}, 2), 1.0);
  // K = 2 with r = 3: p(L-1)(1/beta+1) = 0.5 * 1 * 3 = 1.5.
  EXPECT_DOUBLE_EQ(tree_fs({0.3, 0.5, 0.5, 2.0}, 3), 0.25);
  EXPECT_THROW(tree_fs(kBase, 1), ConfigError);
}

TEST(TreeFs, MaterializedTreeCountsMatch) {
  const auto tree = Topology::tree(2, 10);
  const auto K = line_k_star(kBase);
  const auto profile = tree_level_profile(tree, K);
  EXPECT_EQ(profile.subscriber_count(), 33u);
  EXPECT_EQ(tree.size(), 1023);
  EXPECT_DOUBLE_EQ(profile.subscription_fraction(), tree_fs(kBase, 2));
  EXPECT_TRUE(is_ac_stable(tree, profile, kBase, AnalyticOracle{}).overall);
}

TEST(TreeFs, NeverExceedsLineFs) {
  for (double p : {0.05, 0.2, 0.6}) {
    for (double L : {2.0, 5.0, 11.0}) {
      for (int i = 1; i <= 50; ++i) {
        const SystemParams s{0.3, i / 50.0, p, L};
        if (line_k_star(s) < 2) continue;
        for (int r = 2; r <= 5; ++r) EXPECT_LE(tree_fs(s, r), line_fs(s));
      }
    }
  }
}

TEST(StarThresholds, WorkedExample) {
  const auto t = star_thresholds(0.5, 2.5, 3);
  ASSERT_EQ(t.r(), 3);
  EXPECT_NEAR(t.at(1).value(), 0.6, 1e-12);
  EXPECT_NEAR(t.at(2).value(), 9.0 / 11.0, 1e-12);
  EXPECT_FALSE(t.at(3).is_finite());
  EXPECT_EQ(t.at(3), t.beta_r);
  ASSERT_TRUE(t.beta_c.is_finite());
  EXPECT_NEAR(t.beta_c.value(), 3.0, 1e-12);
  EXPECT_FALSE(t.beta_c.in_unit_interval());
}

TEST(StarThresholds, CenterThresholdInfiniteWhenGossipAloneSuffices) {
  for (int r : {1, 3, 10, 100}) {
    const auto t = star_thresholds(0.2, 10.0, r);
    EXPECT_FALSE(t.beta_c.is_finite()) << r;
  }
}

TEST(StarThresholds, SingleSpokeUsesTheLastBranch) {
  const auto t = star_thresholds(0.4, 3.0, 1);
  ASSERT_EQ(t.r(), 1);
  EXPECT_EQ(t.at(1), t.beta_r);
  // 1/(p (L-1)) - 1 = 0.25.
  EXPECT_NEAR(t.beta_r.value(), 4.0, 1e-12);
}

TEST(StarThresholds, OrderingInvariants) {
  for (double p = 0.05; p < 1.0; p += 0.05) {
    for (double L = 1.1; L < 12.0; L += 0.37) {
      for (int r = 1; r <= 8; ++r) {
        const auto t = star_thresholds(p, L, r);
        bool seen_inf = false;
        for (int k = 1; k <= r; ++k) {
          if (seen_inf) {
            EXPECT_FALSE(t.at(k).is_finite());
            continue;
          }
          if (!t.at(k).is_finite()) {
            seen_inf = true;
            continue;
          }
          if (k > 1) {
            EXPECT_GT(t.at(k).value(), t.at(k - 1).value());
          }
        }
        if (r >= 2 && t.beta_c.is_finite() && t.at(r - 1).is_finite()) {
          EXPECT_GE(t.beta_c.value(), t.at(r - 1).value());
        }
        if (t.beta_c.is_finite() && t.beta_r.is_finite()) {
          EXPECT_GE(t.beta_r.value(), t.beta_c.value());
        }
        if (!t.beta_c.is_finite()) {
          EXPECT_FALSE(t.beta_r.is_finite());
        }
      }
    }
  }
}

TEST(StarRegime, Examples) {
  const auto a = star_regime(0.7, 0.5, 2.5, 3);
  EXPECT_EQ(a.regime, StarRegime::PeripheralK);
  EXPECT_EQ(a.k, 2);
  EXPECT_DOUBLE_EQ(a.f_s, 0.5);
  EXPECT_EQ(a.profile.to_string(), "0011");
  EXPECT_TRUE(a.center_only_stable);

  const auto b = star_regime(0.5, 0.5, 2.5, 3);
  EXPECT_EQ(b.k, 1);
  EXPECT_DOUBLE_EQ(b.f_s, 0.25);

  // beta_r = +inf: all-subscribe is never reached, the top regime is k = r.
  const auto c = star_regime(1.0, 0.5, 2.5, 3);
  EXPECT_EQ(c.regime, StarRegime::AllPeripherals);
  EXPECT_EQ(c.k, 3);
  EXPECT_DOUBLE_EQ(c.f_s, 0.75);

  EXPECT_THROW(star_regime(0.0, 0.5, 2.5, 3), ConfigError);
}

TEST(StarRegime, AllSubscribeAboveBetaR) {
  // p = 0.1, L = 2, r = 2: beta_c = 1/9, beta_r = 1/(1/0.19 - 1).
  const auto t = star_thresholds(0.1, 2.0, 2);
  ASSERT_TRUE(t.beta_r.in_unit_interval());
  EXPECT_NEAR(t.beta_c.value(), 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(t.beta_r.value(), 0.19 / 0.81, 1e-12);
  const auto rep = star_regime(t.beta_r.value(), 0.1, 2.0, 2);
  EXPECT_EQ(rep.regime, StarRegime::AllSubscribe);
  EXPECT_DOUBLE_EQ(rep.f_s, 1.0);
  EXPECT_FALSE(rep.center_only_stable);
}

TEST(AnalyticAges, LineProfile) {
  const auto topo = Topology::line(8);
  const SubscriptionProfile a({true, false, false, true, false, false, false, false});
  const auto ages = analytic_ages(topo, a, kBase);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ages[i], line_node_age(i, kBase), 1e-12);
  for (int i = 3; i < 8; ++i) EXPECT_NEAR(ages[i], line_node_age(i - 3, kBase), 1e-12);
  const auto headless = analytic_ages(topo, a.flipped(0), kBase);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(std::isinf(headless[i]));
}

TEST(AnalyticAges, StarProfiles) {
  const SystemParams s{0.3, 0.6, 0.5, 2.5};
  const auto topo = Topology::star(3);
  const double xs = subscriber_age(s);
  auto ages = analytic_ages(topo, SubscriptionProfile({true, false, true, false}), s);
  EXPECT_DOUBLE_EQ(ages[0], xs);
  EXPECT_DOUBLE_EQ(ages[1], xs + 0.6);
  EXPECT_DOUBLE_EQ(ages[2], xs);
  ages = analytic_ages(topo, SubscriptionProfile({false, false, true, true}), s);
  EXPECT_DOUBLE_EQ(ages[0], xs + 0.3 / 0.75);
  EXPECT_DOUBLE_EQ(ages[1], xs + 0.3 / 0.75 + 0.6);
  ages = analytic_ages(topo, SubscriptionProfile(4, false), s);
  for (double x : ages) EXPECT_TRUE(std::isinf(x));
}

TEST(AnalyticAges, RejectsGraphsWithoutClosedForm) {
  const Topology diamond(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  EXPECT_FALSE(has_closed_form(diamond));
  EXPECT_THROW(analytic_ages(diamond, SubscriptionProfile(4, true), kBase), ConfigError);
  const Topology cycle(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_FALSE(is_out_forest(cycle));
}

// Monte Carlo confirms each closed form on the materialized topology.
class ClosedFormVsSimulation : public ::testing::Test {
protected:
  static SimConfig config() {
    SimConfig c;
    c.replications = 2'000;
    c.horizon = 4'000;
    c.master_seed = 77;
    return c;
  }
};

TEST_F(ClosedFormVsSimulation, StarPeripheralNonSubscriber) {
  const SystemParams s{0.3, 0.6, 0.5, 2.5};
  const auto topo = Topology::star(3);
  const SubscriptionProfile a({true, false, false, false});
  const auto est = estimate_ages(topo, a, s, config());
  const auto ages = analytic_ages(topo, a, s);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(est.mean[i], ages[i], familywise_band(est.ci_half_width[i], ages.size())) << i;
}

TEST_F(ClosedFormVsSimulation, StarCenterFedBySpokes) {
  const SystemParams s{0.3, 0.6, 0.3, 2.5};
  const auto topo = Topology::star(4);
  const SubscriptionProfile a({false, true, true, false, false});
  const auto est = estimate_ages(topo, a, s, config());
  const auto ages = analytic_ages(topo, a, s);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(est.mean[i], ages[i], familywise_band(est.ci_half_width[i], ages.size())) << i;
}

TEST_F(ClosedFormVsSimulation, TreeLevels) {
  const SystemParams s{0.3, 0.6, 0.4, 3.0};
  const auto topo = Topology::tree(2, 4);
  const auto a = tree_level_profile(topo, 3);
  const auto est = estimate_ages(topo, a, s, config());
  const auto ages = analytic_ages(topo, a, s);
  for (int i = 0; i < topo.size(); ++i) EXPECT_NEAR(est.mean[i], ages[i], familywise_band(est.ci_half_width[i], ages.size())) << i;
}
