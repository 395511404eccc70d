#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "minergraph/topology.hpp"
#include "support.hpp"

using namespace minergraph;
using testing_support::ArcList;
using testing_support::make_network;

namespace {

Digraph graph_of(std::size_t n, const ArcList& arcs) { return Digraph(n, arcs); }

// Same-block relation: two partitions agree iff they put the same pairs together.
void expect_same_blocks(const Partition& p, const std::vector<std::vector<bool>>& together) {
  const std::size_t n = p.id.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(p.id[i] == p.id[j], together[i][j]) << i << "," << j;
}

void expect_canonical(const Partition& p) {
  std::size_t next = 0;
  for (std::size_t v = 0; v < p.id.size(); ++v) {
    ASSERT_LE(p.id[v], next);
    if (p.id[v] == next) ++next;
  }
  EXPECT_EQ(next, p.count);
}

}  // namespace

TEST(Wcc, Examples) {
  const auto net = make_network(3, {{0, 1, 1.0}});
  const std::vector<double> shares{0.2, 0.3, 0.5};
  const auto s = weakly_connected_components(net, shares);
  EXPECT_EQ(s.partition.count, 2u);
  EXPECT_EQ(s.partition.id[0], s.partition.id[1]);
  EXPECT_EQ(component_nodes(s.partition, s.gwcc), (std::vector<NodeId>{0, 1}));

  const auto empty = weakly_connected_components(graph_of(3, {}));
  EXPECT_EQ(empty.count, 3u);
}

TEST(Wcc, TieBreaksByHashShareThenId) {
  const auto net = make_network(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  const std::vector<double> favour_second{0.1, 0.1, 0.4, 0.4};
  const auto s = weakly_connected_components(net, favour_second);
  EXPECT_EQ(component_nodes(s.partition, s.gwcc), (std::vector<NodeId>{2, 3}));
  const std::vector<double> equal{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(weakly_connected_components(net, equal).gwcc, 0u);
}

TEST(Scc, Examples) {
  const auto p = strongly_connected_components(graph_of(3, {{0, 1}, {1, 0}}));
  EXPECT_EQ(p.count, 2u);
  EXPECT_EQ(p.id[0], p.id[1]);
  EXPECT_NE(p.id[0], p.id[2]);

  const auto dag = strongly_connected_components(graph_of(5, {{0, 1}, {1, 2}, {0, 3}, {3, 2}, {2, 4}}));
  EXPECT_EQ(dag.count, 5u);
}

TEST(Scc, DeepPathDoesNotOverflow) {
  const std::size_t n = 200000;
  ArcList arcs;
  for (NodeId v = 0; v + 1 < n; ++v) arcs.emplace_back(v, v + 1);
  arcs.emplace_back(static_cast<NodeId>(n - 1), 0);
  const auto p = strongly_connected_components(graph_of(n, arcs));
  EXPECT_EQ(p.count, 1u);
  arcs.pop_back();
  EXPECT_EQ(strongly_connected_components(graph_of(n, arcs)).count, n);
}

TEST(Components, MatchClosureOracle) {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + rng() % 12;
    const double p = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
    const auto arcs = testing_support::random_arcs(rng, n, p);
    const auto g = graph_of(n, arcs);
    const auto reach = testing_support::closure(n, arcs);
    ArcList both = arcs;
    for (auto [u, v] : arcs) both.emplace_back(v, u);
    const auto undirected = testing_support::closure(n, both);

    std::vector<std::vector<bool>> mutual(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) mutual[i][j] = reach[i][j] && reach[j][i];

    const auto scc = strongly_connected_components(g);
    const auto wcc = weakly_connected_components(g);
    expect_same_blocks(scc, mutual);
    expect_same_blocks(wcc, undirected);
    expect_canonical(scc);
    expect_canonical(wcc);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (scc.id[i] == scc.id[j]) EXPECT_EQ(wcc.id[i], wcc.id[j]);
  }
}

TEST(Components, CondensationIsAcyclic) {
  std::mt19937_64 rng(103);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng() % 30;
    const auto arcs = testing_support::random_arcs(rng, n, 0.08);
    const auto scc = strongly_connected_components(graph_of(n, arcs));
    ArcList condensed;
    for (auto [u, v] : arcs) {
      if (scc.id[u] != scc.id[v]) condensed.emplace_back(static_cast<NodeId>(scc.id[u]), static_cast<NodeId>(scc.id[v]));
    }
    std::ranges::sort(condensed);
    condensed.erase(std::unique(condensed.begin(), condensed.end()), condensed.end());
    const auto again = strongly_connected_components(graph_of(scc.count, condensed));
    EXPECT_EQ(again.count, scc.count);
  }
}

TEST(Components, GiantIsLargest) {
  std::mt19937_64 rng(107);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + rng() % 25;
    std::vector<testing_support::WeightedArc> arcs;
    for (auto [u, v] : testing_support::random_arcs(rng, n, 0.06)) arcs.push_back({u, v, 1.0});
    const auto net = make_network(n, arcs);
    const std::vector<double> shares(n, 1.0 / static_cast<double>(n));
    const auto s = weakly_connected_components(net, shares);
    for (std::size_t c = 0; c < s.partition.count; ++c) EXPECT_GE(s.sizes[s.gwcc], s.sizes[c]);
  }
}

TEST(Flows, HandSums) {
  // s=0 sends to m=1; m=1 and m'=2 exchange; m=1 pays r=3.
  const auto net = make_network(4, {{0, 1, 5.0}, {1, 2, 7.0}, {2, 1, 0.5}, {1, 3, 2.0}});
  const auto roles = classify_roles(net);
  ASSERT_EQ(roles[0], Role::sender);
  ASSERT_EQ(roles[1], Role::mixed);
  ASSERT_EQ(roles[2], Role::mixed);
  ASSERT_EQ(roles[3], Role::receiver);
  const auto flows = component_flows(net, roles);
  EXPECT_EQ(flows(Role::sender, Role::mixed), 5.0);
  EXPECT_EQ(flows(Role::mixed, Role::mixed), 7.5);
  EXPECT_EQ(flows(Role::mixed, Role::receiver), 2.0);
  EXPECT_EQ(flows(Role::sender, Role::receiver), 0.0);
  EXPECT_EQ(flows.total(), 14.5);
}

TEST(Flows, EmptyIsZero) {
  const auto net = make_network(2, {});
  EXPECT_EQ(component_flows(net, classify_roles(net)).total(), 0.0);
}

TEST(Flows, TotalEqualsEdgeValueAndGiantHasNoIsolated) {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> value(0.0, 500.0);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng() % 20;
    std::vector<testing_support::WeightedArc> arcs;
    for (auto [u, v] : testing_support::random_arcs(rng, n, 0.15)) arcs.push_back({u, v, value(rng)});
    const auto net = make_network(n, arcs);
    const std::vector<double> shares(n, 1.0 / static_cast<double>(n));
    const auto s = weakly_connected_components(net, shares);
    const auto giant = induced_subgraph(net, component_nodes(s.partition, s.gwcc));
    const auto roles = classify_roles(giant);
    const auto flows = component_flows(giant, roles);
    EXPECT_NEAR(flows.total(), giant.total_value_usd(), 1e-6 * std::max(1.0, giant.total_value_usd()));
    if (giant.node_count() > 1) {
      for (Role r : roles) EXPECT_NE(r, Role::isolated);
    }
    for (Role a : {Role::sender, Role::receiver, Role::mixed})
      for (Role b : {Role::sender, Role::receiver, Role::mixed}) EXPECT_GE(flows(a, b), 0.0);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 4, 6}).r, 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, std::vector<double>{3, 2, 1}).r, -1.0, 1e-12);
  const auto c = pearson(x, std::vector<double>{1, 3, 2});
  EXPECT_NEAR(c.r, 0.5, 1e-12);
  EXPECT_EQ(c.status, CorrelationStatus::ok);
  // t = 0.5 * sqrt(1 / 0.75) with one degree of freedom: p = 1 - 2 atan(t) / pi.
  const double t = 0.5 * std::sqrt(1.0 / 0.75);
  EXPECT_NEAR(c.p_value, 1.0 - 2.0 * std::atan(t) / M_PI, 1e-12);
}

TEST(Pearson, DegenerateInputsAreFlagged) {
  EXPECT_EQ(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}).status, CorrelationStatus::too_few_points);
  const auto flat = pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(flat.status, CorrelationStatus::zero_variance);
  EXPECT_TRUE(std::isnan(flat.r));
}

TEST(SccStats, SizesSharesAndInternalValue) {
  // {0,1} and {2,3,4} are cycles; 5 is a singleton fed by 4.
  const auto net = make_network(6, {{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, 50.0}, {2, 3, 3.0}, {3, 4, 4.0}, {4, 2, 5.0}, {4, 5, 9.0}});
  const std::vector<double> shares{0.1, 0.1, 0.2, 0.2, 0.2, 0.2};
  const auto sccs = strongly_connected_components(net.graph());
  const auto report = scc_stats(net, sccs, shares);
  ASSERT_EQ(report.components.size(), 2u);
  EXPECT_EQ(report.singletons, 1u);
  EXPECT_EQ(report.node_count(), 5u);
  EXPECT_EQ(report.components[0].members, (std::vector<NodeId>{0, 1}));
  EXPECT_NEAR(report.components[0].hash_share, 0.2, 1e-15);
  EXPECT_EQ(report.components[0].internal_value, 3.0);
  EXPECT_NEAR(report.components[1].hash_share, 0.6, 1e-15);
  EXPECT_EQ(report.components[1].internal_value, 12.0);
  EXPECT_EQ(report.correlation.status, CorrelationStatus::too_few_points);
}
