#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "minergraph/address.hpp"
#include "minergraph/digraph.hpp"
#include "minergraph/netbuild.hpp"

namespace testing_support {

using minergraph::Address;
using minergraph::NodeId;

// Address whose last bytes encode `i`; order of addresses follows order of i.
inline Address addr(std::uint32_t i) {
  char buf[43];
  std::snprintf(buf, sizeof buf, "0x%040x", i + 1);
  return *Address::parse(buf);
}

inline std::string hex(std::uint32_t i) { return addr(i).str(); }

struct WeightedArc {
  NodeId from;
  NodeId to;
  double value;
};

// Network over addr(0..n-1) with one edge per listed arc (count 1).
inline minergraph::MinerNetwork make_network(std::size_t n, const std::vector<WeightedArc>& arcs) {
  std::vector<Address> nodes;
  for (std::uint32_t i = 0; i < n; ++i) nodes.push_back(addr(i));
  std::vector<minergraph::Edge> edges;
  for (const auto& a : arcs) edges.push_back({a.from, a.to, {a.value, 1}});
  std::ranges::sort(edges, [](const auto& x, const auto& y) { return std::pair(x.from, x.to) < std::pair(y.from, y.to); });
  return minergraph::MinerNetwork(std::move(nodes), std::move(edges), {});
}

inline minergraph::MinerStats make_stats(const std::vector<std::uint64_t>& blocks) {
  std::vector<minergraph::MinerStat> stats;
  std::uint64_t total = 0;
  for (std::uint32_t i = 0; i < blocks.size(); ++i) {
    stats.push_back({addr(i), blocks[i], 0.0, 0});
    total += blocks[i];
  }
  return minergraph::MinerStats(std::move(stats), total);
}

using ArcList = std::vector<std::pair<NodeId, NodeId>>;

// Simple digraph (no loops, no parallel arcs) with arc probability p.
inline ArcList random_arcs(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  ArcList arcs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u != v && coin(rng)) arcs.emplace_back(u, v);
    }
  }
  return arcs;
}

inline std::vector<std::vector<bool>> closure(std::size_t n, const ArcList& arcs) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& [u, v] : arcs) r[u][v] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

// Largest matching by exhaustive search over arcs (each tail and head once).
inline std::size_t brute_force_matching(std::size_t n, const ArcList& arcs) {
  std::size_t best = 0;
  std::vector<bool> tail(n, false);
  std::vector<bool> head(n, false);
  auto go = [&](auto&& self, std::size_t i, std::size_t size) -> void {
    best = std::max(best, size);
    if (i == arcs.size() || size + (arcs.size() - i) <= best) return;
    const auto [u, v] = arcs[i];
    if (!tail[u] && !head[v]) {
      tail[u] = head[v] = true;
      self(self, i + 1, size + 1);
      tail[u] = head[v] = false;
    }
    self(self, i + 1, size);
  };
  go(go, 0, 0);
  return best;
}

// Minimum-weight dominating set weight by enumeration of all subsets.
inline double brute_force_domination(std::size_t n, const ArcList& arcs, const std::vector<double>& w) {
  std::vector<std::uint32_t> reach(n, 0);
  for (std::size_t v = 0; v < n; ++v) reach[v] = 1u << v;
  for (const auto& [u, v] : arcs) reach[u] |= 1u << v;
  const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
  double best = 1e300;
  for (std::uint32_t mask = 0; mask <= all; ++mask) {
    std::uint32_t cov = 0;
    double weight = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (mask >> v & 1u) {
        cov |= reach[v];
        weight += w[v];
      }
    }
    if (cov == all) best = std::min(best, weight);
    if (mask == all) break;
  }
  return best;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("minergraph_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
