#pragma once

// Weak and strong component structure, role-class flows inside the giant
// weakly connected component, and SCC statistics.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "minergraph/concentration.hpp"
#include "minergraph/digraph.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/numeric.hpp"

namespace minergraph {

// Partition of the nodes into components. Ids are dense from 0 and numbered
// by the smallest node id in each component.
struct Partition {
  std::vector<std::size_t> id;
  std::size_t count = 0;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(count, 0);
    for (auto c : id) ++s[c];
    return s;
  }

  std::vector<std::vector<NodeId>> members() const {
    std::vector<std::vector<NodeId>> m(count);
    for (NodeId v = 0; v < id.size(); ++v) m[id[v]].push_back(v);
    return m;
  }
};

namespace detail {

inline Partition canonical_partition(std::span<const std::size_t> raw, std::size_t raw_count) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> relabel(raw_count, kUnset);
  Partition p;
  p.id.resize(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) {
    if (relabel[raw[v]] == kUnset) relabel[raw[v]] = p.count++;
    p.id[v] = relabel[raw[v]];
  }
  return p;
}

}  // namespace detail

// Components of the underlying undirected graph.
inline Partition weakly_connected_components(const Digraph& g) {
  const std::size_t n = g.node_count();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  Partition p;
  p.id.assign(n, kUnset);
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    if (p.id[s] != kUnset) continue;
    const std::size_t c = p.count++;
    p.id[s] = c;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      for (auto adj : {g.out(v), g.in(v)}) {
        for (NodeId w : adj) {
          if (p.id[w] == kUnset) {
            p.id[w] = c;
            queue.push_back(w);
          }
        }
      }
    }
  }
  return p;
}

// Tarjan's algorithm with an explicit call stack; linear time, no recursion.
// Singleton components are included.
inline Partition strongly_connected_components(const Digraph& g) {
  const std::size_t n = g.node_count();
  constexpr auto kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  std::vector<std::pair<NodeId, std::size_t>> calls;  // (node, next out-arc)
  std::vector<std::size_t> raw(n, 0);
  std::size_t next_index = 0;
  std::size_t raw_count = 0;

  auto visit = [&](NodeId v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    calls.emplace_back(v, 0);
  };

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    visit(root);
    while (!calls.empty()) {
      auto& [v, pos] = calls.back();
      const auto succ = g.out(v);
      if (pos < succ.size()) {
        const NodeId w = succ[pos++];
        if (index[w] == kUnvisited) {
          visit(w);  // invalidates v/pos
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const NodeId done = v;
      calls.pop_back();
      if (low[done] == index[done]) {
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          raw[w] = raw_count;
        } while (w != done);
        ++raw_count;
      }
      if (!calls.empty()) {
        const NodeId parent = calls.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return detail::canonical_partition(raw, raw_count);
}

struct WccSummary {
  Partition partition;
  std::vector<std::size_t> sizes;
  std::vector<double> hash_share;
  std::size_t gwcc = 0;  // id of the giant component
};

// Giant component: most nodes, then largest hash share, then lowest id.
inline WccSummary weakly_connected_components(const MinerNetwork& net, std::span<const double> shares) {
  WccSummary s;
  s.partition = weakly_connected_components(net.graph());
  s.sizes = s.partition.sizes();
  std::vector<CompensatedSum> hash(s.partition.count);
  for (NodeId v = 0; v < net.node_count(); ++v) hash[s.partition.id[v]] += shares[v];
  s.hash_share.resize(s.partition.count);
  for (std::size_t c = 0; c < s.partition.count; ++c) s.hash_share[c] = hash[c].value();
  for (std::size_t c = 1; c < s.partition.count; ++c) {
    if (s.sizes[c] > s.sizes[s.gwcc] || (s.sizes[c] == s.sizes[s.gwcc] && s.hash_share[c] > s.hash_share[s.gwcc])) {
      s.gwcc = c;
    }
  }
  return s;
}

inline std::vector<NodeId> component_nodes(const Partition& p, std::size_t component) {
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < p.id.size(); ++v) {
    if (p.id[v] == component) nodes.push_back(v);
  }
  return nodes;
}

// Edge value summed by (role of sender, role of receiver).
class FlowMatrix {
 public:
  static constexpr std::array<Role, 4> kRoles{Role::sender, Role::receiver, Role::mixed, Role::isolated};

  double operator()(Role from, Role to) const { return cells_[idx(from)][idx(to)]; }
  double& operator()(Role from, Role to) { return cells_[idx(from)][idx(to)]; }

  double total() const {
    CompensatedSum s;
    for (const auto& row : cells_) {
      for (double v : row) s += v;
    }
    return s.value();
  }

 private:
  static constexpr std::size_t idx(Role r) { return static_cast<std::size_t>(r); }
  std::array<std::array<double, 4>, 4> cells_{};
};

// `gwcc` is the giant-component-induced network, `roles` its own roles.
inline FlowMatrix component_flows(const MinerNetwork& gwcc, std::span<const Role> roles) {
  std::array<std::array<CompensatedSum, 4>, 4> acc{};
  for (const auto& e : gwcc.edges()) {
    acc[static_cast<std::size_t>(roles[e.from])][static_cast<std::size_t>(roles[e.to])] += e.attr.value_usd;
  }
  FlowMatrix m;
  for (Role a : FlowMatrix::kRoles) {
    for (Role b : FlowMatrix::kRoles) m(a, b) = acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].value();
  }
  return m;
}

enum class CorrelationStatus { ok, too_few_points, zero_variance };

struct Correlation {
  CorrelationStatus status = CorrelationStatus::too_few_points;
  double r = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
};

// Pearson r with a two-sided p-value from Student's t with n-2 degrees of
// freedom, t = r sqrt((n-2)/(1-r^2)). Needs at least three points.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  Correlation c;
  if (x.size() != y.size()) throw InvalidInput("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) return c;
  const double mx = compensated_sum(x) / static_cast<double>(n);
  const double my = compensated_sum(y) / static_cast<double>(n);
  CompensatedSum sxy;
  CompensatedSum sxx;
  CompensatedSum syy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) {
    c.status = CorrelationStatus::zero_variance;
    return c;
  }
  c.status = CorrelationStatus::ok;
  c.r = std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  if (std::fabs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
    const boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  }
  return c;
}

struct SccStat {
  std::size_t id = 0;  // id in the SCC partition
  std::vector<NodeId> members;
  double hash_share = 0.0;
  double internal_value = 0.0;  // value on edges with both ends inside
};

struct SccReport {
  std::vector<SccStat> components;  // size >= 2 only, by partition id
  std::size_t singletons = 0;
  Correlation correlation;          // hash_share vs internal_value

  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.members.size();
    return n;
  }
};

inline SccReport scc_stats(const MinerNetwork& net, const Partition& sccs, std::span<const double> shares) {
  SccReport report;
  const auto members = sccs.members();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot(sccs.count, kNone);
  for (std::size_t c = 0; c < sccs.count; ++c) {
    if (members[c].size() < 2) {
      ++report.singletons;
      continue;
    }
    slot[c] = report.components.size();
    SccStat s;
    s.id = c;
    s.members = members[c];
    CompensatedSum h;
    for (NodeId v : s.members) h += shares[v];
    s.hash_share = h.value();
    report.components.push_back(std::move(s));
  }
  std::vector<CompensatedSum> internal(report.components.size());
  for (const auto& e : net.edges()) {
    const std::size_t c = sccs.id[e.from];
    if (c == sccs.id[e.to] && slot[c] != kNone) internal[slot[c]] += e.attr.value_usd;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < report.components.size(); ++i) {
    report.components[i].internal_value = internal[i].value();
    xs.push_back(report.components[i].hash_share);
    ys.push_back(report.components[i].internal_value);
  }
  report.correlation = pearson(xs, ys);
  return report;
}

// Per-node component and role labels for one network.
struct ComponentMap {
  std::vector<std::size_t> wcc_id;
  std::vector<std::size_t> scc_id;
  std::vector<Role> role;
  std::size_t gwcc_id = 0;
};

}  // namespace minergraph
