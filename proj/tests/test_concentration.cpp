#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "minergraph/concentration.hpp"
#include "support.hpp"

using namespace minergraph;
using testing_support::make_network;
using testing_support::make_stats;

namespace {

// Mean absolute difference form, independent of the sorted-rank formula.
double gini_oracle(const std::vector<double>& x) {
  double diff = 0.0, total = 0.0;
  for (double a : x) {
    total += a;
    for (double b : x) diff += std::fabs(a - b);
  }
  const double n = static_cast<double>(x.size());
  return diff / (2.0 * n * total);
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> dist(0.01);
  std::vector<double> v(n);
  for (auto& x : v) x = std::floor(dist(rng));
  v[0] += 1.0;
  return v;
}

}  // namespace

TEST(Gini, Examples) {
  EXPECT_EQ(gini(std::vector<double>{1, 1, 1, 1}), 0.0);
  EXPECT_NEAR(gini(std::vector<double>{0, 0, 0, 1}), 0.75, 1e-12);
  EXPECT_NEAR(gini(std::vector<double>{5}), 0.0, 1e-15);
}

TEST(Gini, UndefinedInputs) {
  EXPECT_THROW(gini(std::vector<double>{}), InvalidInput);
  EXPECT_THROW(gini(std::vector<double>{0, 0}), InvalidInput);
  EXPECT_THROW(gini(std::vector<double>{1, -1}), InvalidInput);
}

TEST(Gini, MatchesOracleAndInvariants) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 200; ++round) {
    auto x = random_values(rng, 1 + rng() % 60);
    const double g = gini(x);
    EXPECT_NEAR(g, gini_oracle(x), 1e-12);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);
    auto scaled = x;
    for (auto& v : scaled) v *= 7.25;
    EXPECT_NEAR(gini(scaled), g, 1e-12);
    std::ranges::shuffle(x, rng);
    EXPECT_NEAR(gini(x), g, 1e-12);
    std::vector<double> constant(x.size(), 3.0);
    EXPECT_EQ(gini(constant), 0.0);
  }
}

TEST(Hhi, Examples) {
  EXPECT_EQ(hhi(std::vector<double>{100}), 10000.0);
  EXPECT_EQ(hhi(std::vector<double>{50, 50}), 5000.0);
  EXPECT_NEAR(hhi(std::vector<double>{60, 20, 20}), 4400.0, 1e-9);
}

TEST(Hhi, SharesMustSumToHundred) {
  EXPECT_THROW(hhi(std::vector<double>{50, 40}), InvalidInput);
  EXPECT_THROW(hhi(std::vector<double>{}), InvalidInput);
}

TEST(Hhi, PermutationInvariantAndBoundedByEqualShares) {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 200; ++round) {
    auto x = random_values(rng, 1 + rng() % 40);
    double total = 0.0;
    for (double v : x) total += v;
    for (auto& v : x) v = 100.0 * v / total;
    const double h = hhi(x);
    EXPECT_GE(h, 10000.0 / static_cast<double>(x.size()) - 1e-9);
    EXPECT_LE(h, 10000.0 + 1e-9);
    std::ranges::shuffle(x, rng);
    EXPECT_NEAR(hhi(x), h, 1e-9);
  }
}

TEST(Hhi, FromStats) {
  EXPECT_NEAR(hhi(make_stats({3, 1, 1})), 3600.0 + 400.0 + 400.0, 1e-9);
}

TEST(TopN, Examples) {
  const auto stats = make_stats({5, 3, 2});
  EXPECT_NEAR(top_n_share(stats, 2), 0.8, 1e-15);
  EXPECT_NEAR(top_n_share(stats, 3), 1.0, 1e-15);
  EXPECT_NEAR(top_n_share(stats, 10), 1.0, 1e-15);
  EXPECT_EQ(top_n_share(make_stats({4}), 1), 1.0);
  EXPECT_THROW(top_n_share(stats, 0), InvalidInput);
}

TEST(Density, Examples) {
  const auto k3 = make_network(3, {{0, 1, 1}, {0, 2, 1}, {1, 0, 1}, {1, 2, 1}, {2, 0, 1}, {2, 1, 1}});
  EXPECT_EQ(density(k3), 1.0);
  const auto sparse = make_network(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  EXPECT_EQ(density(sparse), 0.25);
  EXPECT_THROW(density(make_network(1, {})), InvalidInput);
}

TEST(Density, ConnectedVariantIgnoresIsolatedMiners) {
  const auto net = make_network(6, {{0, 1, 1}, {1, 2, 1}});
  EXPECT_EQ(connected_node_count(net), 3u);
  EXPECT_NEAR(*connected_density(net), 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(density(net), 2.0 / 30.0, 1e-15);
  EXPECT_FALSE(connected_density(make_network(3, {})));
}

TEST(Density, AddingAnEdgeIncreasesIt) {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 2 + rng() % 8;
    auto arcs = testing_support::random_arcs(rng, n, 0.3);
    if (arcs.size() == n * (n - 1)) continue;
    std::vector<testing_support::WeightedArc> weighted;
    for (auto [u, v] : arcs) weighted.push_back({u, v, 1.0});
    const double before = density(make_network(n, weighted));
    std::vector<std::pair<NodeId, NodeId>> missing;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = 0; v < n; ++v) {
        if (u != v && std::ranges::find(arcs, std::pair{u, v}) == arcs.end()) missing.emplace_back(u, v);
      }
    }
    const auto [u, v] = missing[rng() % missing.size()];
    weighted.push_back({u, v, 1.0});
    EXPECT_GT(density(make_network(n, weighted)), before);
  }
}

TEST(DegreeProfile, HandSums) {
  const auto net = make_network(2, {{0, 1, 10.0}, {1, 0, 1.0}});
  const auto p = degree_profile(net);
  EXPECT_EQ(p.w_out[0], 10.0);
  EXPECT_EQ(p.w_in[0], 1.0);
  EXPECT_EQ(p.w_out[1], 1.0);
  EXPECT_EQ(p.w_in[1], 10.0);
  EXPECT_EQ(p.d_in[0], 1u);
  EXPECT_EQ(p.d_out[1], 1u);
  EXPECT_EQ(p.mean_weighted_degree(), 5.5);
  EXPECT_EQ(p.median_weighted_degree(), 11.0);
}

TEST(DegreeProfile, EmptyGraphIsZero) {
  const auto p = degree_profile(make_network(3, {}));
  for (std::size_t v = 0; v < 3; ++v) {
    EXPECT_EQ(p.w_in[v], 0.0);
    EXPECT_EQ(p.w_out[v], 0.0);
  }
  EXPECT_EQ(p.mean_weighted_degree(), 0.0);
  EXPECT_EQ(p.median_weighted_degree(), 0.0);
}

TEST(DegreeProfile, MedianIsZeroWhenMostNodesAreIsolated) {
  const auto net = make_network(7, {{0, 1, 100.0}, {1, 2, 50.0}});
  EXPECT_EQ(degree_profile(net).median_weighted_degree(), 0.0);
}

TEST(Roles, Examples) {
  const auto one_way = make_network(3, {{0, 1, 1.0}});
  const auto roles = classify_roles(one_way);
  EXPECT_EQ(roles[0], Role::sender);
  EXPECT_EQ(roles[1], Role::receiver);
  EXPECT_EQ(roles[2], Role::isolated);
  const auto both = classify_roles(make_network(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
  EXPECT_EQ(both[0], Role::mixed);
  EXPECT_EQ(both[1], Role::mixed);
  EXPECT_EQ(parse_role(role_name(Role::receiver)), Role::receiver);
}

TEST(Roles, CountsPartitionNodes) {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + rng() % 15;
    std::vector<testing_support::WeightedArc> arcs;
    for (auto [u, v] : testing_support::random_arcs(rng, n, 0.15)) arcs.push_back({u, v, 1.0});
    const auto roles = classify_roles(make_network(n, arcs));
    const auto c = count_roles(roles);
    EXPECT_EQ(c.sender + c.receiver + c.mixed + c.isolated, n);
  }
}
