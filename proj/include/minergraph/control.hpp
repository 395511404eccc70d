#pragma once

// Hierarchy, structural-controllability and domination analyses.
//
// Domination follows transaction direction: a node dominates itself and
// every miner it has sent a transaction to. Nodes without incoming edges
// can only be dominated by themselves and are forced members.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "minergraph/digraph.hpp"
#include "minergraph/error.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/numeric.hpp"
#include "minergraph/rng.hpp"

namespace minergraph {

// ---------------------------------------------------------------------------
// Relationships against the hierarchy

enum class HierarchyLabel : std::uint8_t { against, with, tied };

struct HierarchyReport {
  std::vector<HierarchyLabel> labels;   // one per edge of the network
  std::vector<std::size_t> against;     // edge indices
  std::vector<double> climb_pct;        // parallel to `against`
  std::size_t with_count = 0;
  std::size_t tied_count = 0;
  double against_value_usd = 0.0;
  double total_value_usd = 0.0;
  double against_fraction_of_value = 0.0;
  double mean_rank_climb_pct = 0.0;
};

// Rank percentile in [0, 1]: 1 for the top miner, 0 for the last of N.
inline double rank_percentile(std::size_t rank, std::size_t n) {
  return 1.0 - static_cast<double>(rank - 1) / static_cast<double>(n - 1);
}

// Edge i->j is against the hierarchy when j mined strictly more blocks than
// i, tied when equal. Percentiles use the ranks of all N miners in `stats`.
inline HierarchyReport against_hierarchy(const MinerNetwork& net, const MinerStats& stats) {
  HierarchyReport r;
  if (stats.size() < 2) return r;
  const auto edges = net.edges();
  r.labels.reserve(edges.size());
  CompensatedSum against_value;
  CompensatedSum total_value;
  CompensatedSum climb;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const MinerStat& from = stats.at(net.address(e.from));
    const MinerStat& to = stats.at(net.address(e.to));
    total_value += e.attr.value_usd;
    if (to.blocks_mined > from.blocks_mined) {
      r.labels.push_back(HierarchyLabel::against);
      r.against.push_back(i);
      const double c = (rank_percentile(to.rank, stats.size()) - rank_percentile(from.rank, stats.size())) * 100.0;
      r.climb_pct.push_back(c);
      climb += c;
      against_value += e.attr.value_usd;
    } else if (to.blocks_mined == from.blocks_mined) {
      r.labels.push_back(HierarchyLabel::tied);
      ++r.tied_count;
    } else {
      r.labels.push_back(HierarchyLabel::with);
      ++r.with_count;
    }
  }
  r.against_value_usd = against_value.value();
  r.total_value_usd = total_value.value();
  r.against_fraction_of_value = r.total_value_usd > 0.0 ? r.against_value_usd / r.total_value_usd : 0.0;
  r.mean_rank_climb_pct = r.against.empty() ? 0.0 : climb.value() / static_cast<double>(r.against.size());
  return r;
}

// ---------------------------------------------------------------------------
// Maximum matching of the bipartite split graph (u's out-copy to v's in-copy)

inline constexpr NodeId kUnmatched = std::numeric_limits<NodeId>::max();

struct Matching {
  std::vector<NodeId> head_of;  // by tail: matched head or kUnmatched
  std::vector<NodeId> tail_of;  // by head: matched tail or kUnmatched
  std::size_t size = 0;

  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < head_of.size(); ++u) {
      if (head_of[u] != kUnmatched) out.emplace_back(u, head_of[u]);
    }
    return out;
  }
};

// Hopcroft-Karp, O(E sqrt V). The augmenting search uses an explicit stack.
inline Matching maximum_matching(const Digraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  Matching m{std::vector<NodeId>(n, kUnmatched), std::vector<NodeId>(n, kUnmatched), 0};
  std::vector<std::size_t> dist(n);
  std::vector<std::size_t> cursor(n);
  std::vector<NodeId> queue;
  std::vector<NodeId> stack;

  auto layer = [&] {
    queue.clear();
    for (NodeId u = 0; u < n; ++u) {
      if (m.head_of[u] == kUnmatched) {
        dist[u] = 0;
        queue.push_back(u);
      } else {
        dist[u] = kInf;
      }
    }
    bool reachable_free = false;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const NodeId u = queue[h];
      for (NodeId v : g.out(u)) {
        const NodeId w = m.tail_of[v];
        if (w == kUnmatched) {
          reachable_free = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
    return reachable_free;
  };

  auto augment_from = [&](NodeId root) {
    stack.assign(1, root);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      const auto succ = g.out(u);
      if (cursor[u] == succ.size()) {
        dist[u] = kInf;
        stack.pop_back();
        continue;
      }
      const NodeId v = succ[cursor[u]];
      const NodeId w = m.tail_of[v];
      if (w == kUnmatched) {
        for (NodeId x : stack) {
          const NodeId y = g.out(x)[cursor[x]];
          m.head_of[x] = y;
          m.tail_of[y] = x;
        }
        return true;
      }
      if (dist[w] != kInf && dist[w] == dist[u] + 1) {
        stack.push_back(w);
      } else {
        ++cursor[u];
      }
    }
    return false;
  };

  while (layer()) {
    std::fill(cursor.begin(), cursor.end(), 0);
    for (NodeId u = 0; u < n; ++u) {
      if (m.head_of[u] == kUnmatched && dist[u] == 0 && augment_from(u)) ++m.size;
    }
  }
  return m;
}

// No two edges share a tail or a head, and every edge exists in `g`.
inline bool is_valid_matching(const Digraph& g, std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<bool> tail_used(g.node_count(), false);
  std::vector<bool> head_used(g.node_count(), false);
  for (const auto& [u, v] : edges) {
    if (u >= g.node_count() || v >= g.node_count() || tail_used[u] || head_used[v]) return false;
    const auto succ = g.out(u);
    if (std::find(succ.begin(), succ.end(), v) == succ.end()) return false;
    tail_used[u] = head_used[v] = true;
  }
  return true;
}

struct DriverSet {
  std::vector<NodeId> drivers;  // sorted
  std::size_t n_d = 0;
  Matching matching;
  double reachable_fraction = 1.0;  // of non-driver nodes, reachable from drivers
};

// Fraction of nodes outside `sources` reachable from them; 1 when there are
// no such nodes.
inline double reachable_fraction(const Digraph& g, std::span<const NodeId> sources) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeId> queue(sources.begin(), sources.end());
  for (NodeId s : sources) seen[s] = true;
  std::size_t reached = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    for (NodeId w : g.out(queue[h])) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  const std::size_t others = g.node_count() - sources.size();
  return others == 0 ? 1.0 : static_cast<double>(reached) / static_cast<double>(others);
}

// Drivers are the nodes whose in-copy is unmatched. A perfect matching still
// needs one driver: node 0, the lexicographically smallest address.
// n_d = max(|V| - |M|, 1), or 0 for an empty graph.
inline DriverSet driver_nodes(const Digraph& g) {
  DriverSet d;
  d.matching = maximum_matching(g);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (d.matching.tail_of[v] == kUnmatched) d.drivers.push_back(v);
  }
  if (d.drivers.empty() && g.node_count() > 0) d.drivers.push_back(0);
  d.n_d = d.drivers.size();
  d.reachable_fraction = reachable_fraction(g, d.drivers);
  return d;
}

inline DriverSet driver_nodes(const MinerNetwork& net) { return driver_nodes(net.graph()); }

// ---------------------------------------------------------------------------
// Dominating sets

struct DominatingSet {
  std::vector<NodeId> members;  // sorted
  double total_hash_share = 0.0;
  double covered_hash_share = 0.0;
  std::size_t covered_count = 0;
  bool coverage_complete = false;  // full: every node; threshold: theta reached
};

// Nodes dominated by `members`.
inline std::vector<bool> dominated_nodes(const Digraph& g, std::span<const NodeId> members) {
  std::vector<bool> covered(g.node_count(), false);
  for (NodeId v : members) {
    covered[v] = true;
    for (NodeId w : g.out(v)) covered[w] = true;
  }
  return covered;
}

// Independent coverage check: every node is a member or has an in-edge from
// a member.
inline bool verify_domination(const Digraph& g, std::span<const NodeId> members) {
  std::vector<bool> member(g.node_count(), false);
  for (NodeId v : members) {
    if (v >= g.node_count()) return false;
    member[v] = true;
  }
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (member[v]) continue;
    const auto pred = g.in(v);
    if (std::none_of(pred.begin(), pred.end(), [&](NodeId u) { return member[u]; })) return false;
  }
  return true;
}

inline double set_weight(std::span<const NodeId> members, std::span<const double> weights) {
  std::vector<NodeId> sorted(members.begin(), members.end());
  std::ranges::sort(sorted);
  CompensatedSum s;
  for (NodeId v : sorted) s += weights[v];
  return s.value();
}

inline double covered_weight(const Digraph& g, std::span<const NodeId> members, std::span<const double> weights) {
  const auto covered = dominated_nodes(g, members);
  CompensatedSum s;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (covered[v]) s += weights[v];
  }
  return s.value();
}

inline constexpr double kRatioEpsilon = 1e-12;
inline constexpr double kThresholdTolerance = 1e-12;

namespace detail {

// State shared by one greedy run: membership and per-node cover counts
// (members count towards their own cover).
class CoverState {
 public:
  CoverState(const Digraph& g, std::span<const double> weights)
      : g_(g), weights_(weights), member_(g.node_count(), false), forced_(g.node_count(), false),
        cover_(g.node_count(), 0), uncovered_(g.node_count()) {}

  void add(NodeId v) {
    member_[v] = true;
    touch(v, +1);
    for (NodeId w : g_.out(v)) touch(w, +1);
  }

  void remove(NodeId v) {
    member_[v] = false;
    touch(v, -1);
    for (NodeId w : g_.out(v)) touch(w, -1);
  }

  void force(NodeId v) {
    forced_[v] = true;
    add(v);
  }

  // Nodes in N[v] not yet covered, and their total weight.
  std::pair<std::size_t, double> gain(NodeId v) const {
    std::size_t count = 0;
    double weight = 0.0;
    if (cover_[v] == 0) {
      ++count;
      weight += weights_[v];
    }
    for (NodeId w : g_.out(v)) {
      if (cover_[w] == 0) {
        ++count;
        weight += weights_[w];
      }
    }
    return {count, weight};
  }

  // Weight that would become uncovered if v left the set.
  double loss_if_removed(NodeId v) const {
    double w = cover_[v] == 1 ? weights_[v] : 0.0;
    for (NodeId x : g_.out(v)) {
      if (cover_[x] == 1) w += weights_[x];
    }
    return w;
  }

  bool removable_keeping_all(NodeId v) const {
    if (forced_[v] || cover_[v] < 2) return false;
    for (NodeId x : g_.out(v)) {
      if (cover_[x] < 2) return false;
    }
    return true;
  }

  std::size_t uncovered() const noexcept { return uncovered_; }
  double covered_weight() const noexcept { return covered_weight_; }
  bool member(NodeId v) const noexcept { return member_[v]; }
  bool forced(NodeId v) const noexcept { return forced_[v]; }

  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < member_.size(); ++v) {
      if (member_[v]) out.push_back(v);
    }
    return out;
  }

 private:
  void touch(NodeId v, int delta) {
    if (delta > 0) {
      if (cover_[v]++ == 0) {
        --uncovered_;
        covered_weight_ += weights_[v];
      }
    } else if (--cover_[v] == 0) {
      ++uncovered_;
      covered_weight_ -= weights_[v];
    }
  }

  const Digraph& g_;
  std::span<const double> weights_;
  std::vector<bool> member_;
  std::vector<bool> forced_;
  std::vector<std::uint32_t> cover_;
  std::size_t uncovered_;
  double covered_weight_ = 0.0;
};

struct Candidate {
  double score;
  std::uint64_t key;  // tie-break, lower wins
  NodeId node;
};

struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.score != b.score) return a.score < b.score;
    return a.key > b.key;
  }
};

enum class Objective { full, threshold };

// One lazy-greedy run. Scores only decrease as coverage grows, so a popped
// candidate whose recomputed score is unchanged is the true maximum.
inline std::vector<NodeId> greedy_run(const Digraph& g, std::span<const double> weights, Objective objective,
                                      double theta, std::span<const std::uint64_t> keys, std::optional<NodeId> start) {
  CoverState state(g, weights);
  const std::size_t n = g.node_count();
  if (objective == Objective::full) {
    for (NodeId v = 0; v < n; ++v) {
      if (g.in_degree(v) == 0) state.force(v);
    }
  }
  auto done = [&] {
    return objective == Objective::full ? state.uncovered() == 0
                                        : state.covered_weight() >= theta - kThresholdTolerance;
  };
  auto score_of = [&](NodeId v) {
    const auto [count, weight] = state.gain(v);
    const double gain = objective == Objective::full ? static_cast<double>(count) : weight;
    return gain / (weights[v] + kRatioEpsilon);
  };

  if (start && !state.member(*start) && !done() && score_of(*start) > 0.0) state.add(*start);

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap;
  for (NodeId v = 0; v < n; ++v) {
    if (state.member(v)) continue;
    const double s = score_of(v);
    if (s > 0.0) heap.push({s, keys[v], v});
  }
  while (!done() && !heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (state.member(top.node)) continue;
    const double s = score_of(top.node);
    if (!(s > 0.0)) continue;
    if (s < top.score) {
      heap.push({s, top.key, top.node});
      continue;
    }
    state.add(top.node);
  }

  // Drop redundant members, heaviest first.
  std::vector<NodeId> order = state.members();
  std::ranges::sort(order, [&](NodeId a, NodeId b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return keys[a] > keys[b];
  });
  const bool reached = done();
  for (NodeId v : order) {
    if (objective == Objective::full) {
      if (reached && state.removable_keeping_all(v)) state.remove(v);
    } else if (reached && state.covered_weight() - state.loss_if_removed(v) >= theta - kThresholdTolerance) {
      state.remove(v);
    }
  }
  return state.members();
}

inline DominatingSet finish(const Digraph& g, std::span<const double> weights, std::vector<NodeId> members) {
  DominatingSet d;
  d.members = std::move(members);
  std::ranges::sort(d.members);
  d.total_hash_share = set_weight(d.members, weights);
  const auto covered = dominated_nodes(g, d.members);
  d.covered_count = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  d.covered_hash_share = covered_weight(g, d.members, weights);
  return d;
}

inline bool better(const DominatingSet& a, const DominatingSet& b) {
  if (a.coverage_complete != b.coverage_complete) return a.coverage_complete;
  if (a.total_hash_share != b.total_hash_share) return a.total_hash_share < b.total_hash_share;
  return a.members < b.members;
}

inline DominatingSet multi_start(const Digraph& g, std::span<const double> weights, Objective objective, double theta,
                                 std::size_t restarts, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  if (weights.size() != n) throw InvalidInput("dominating set: weight vector size mismatch");
  std::vector<std::uint64_t> keys(n);
  std::iota(keys.begin(), keys.end(), std::uint64_t{0});
  DominatingSet best;
  bool have_best = false;
  const std::size_t runs = std::max<std::size_t>(restarts, 1);
  for (std::size_t r = 0; r < runs; ++r) {
    std::optional<NodeId> start;
    if (r > 0 && n > 0) {
      Rng rng(splitmix64(seed + r));
      std::iota(keys.begin(), keys.end(), std::uint64_t{0});
      std::shuffle(keys.begin(), keys.end(), rng);
      start = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    }
    DominatingSet candidate = finish(g, weights, greedy_run(g, weights, objective, theta, keys, start));
    candidate.coverage_complete = objective == Objective::full
                                      ? verify_domination(g, candidate.members)
                                      : candidate.covered_hash_share >= theta - kThresholdTolerance;
    if (!have_best || better(candidate, best)) {
      best = std::move(candidate);
      have_best = true;
    }
  }
  return best;
}

}  // namespace detail

// Seeded multi-start greedy for a minimum-weight dominating set. Each run
// forces in-degree-0 nodes, then repeatedly adds the node maximizing
// (newly dominated count) / (weight + 1e-12), then drops redundant members.
// Run 0 breaks ties by node id; later runs use seeded random tie-breaks and
// a random first pick. The lightest valid result wins (ties: lexicographic
// member list).
inline DominatingSet greedy_min_weight_dominating_set(const Digraph& g, std::span<const double> weights,
                                                      std::size_t restarts, std::uint64_t seed) {
  DominatingSet d = detail::multi_start(g, weights, detail::Objective::full, 1.0, restarts, seed);
  if (!verify_domination(g, d.members)) throw std::logic_error("greedy domination produced an invalid set");
  d.coverage_complete = true;
  return d;
}

inline DominatingSet greedy_min_weight_dominating_set(const MinerNetwork& net, const MinerStats& stats,
                                                      std::size_t restarts, std::uint64_t seed) {
  return greedy_min_weight_dominating_set(net.graph(), stats.shares_for(net), restarts, seed);
}

inline constexpr std::size_t kExactDominationLimit = 20;

// Exhaustive minimum-weight dominating set for at most 20 nodes. Ties go to
// the lexicographically smallest member list.
inline DominatingSet exact_min_weight_dominating_set(const Digraph& g, std::span<const double> weights) {
  const std::size_t n = g.node_count();
  if (n > kExactDominationLimit) {
    throw Refusal("exact domination refuses " + std::to_string(n) + " nodes (limit " +
                  std::to_string(kExactDominationLimit) + ")");
  }
  if (weights.size() != n) throw InvalidInput("dominating set: weight vector size mismatch");
  const std::uint32_t all = n == 32 ? ~0u : ((1u << n) - 1u);
  std::vector<std::uint32_t> closed(n, 0);
  std::uint32_t forced = 0;
  std::vector<NodeId> free_nodes;
  for (NodeId v = 0; v < n; ++v) {
    closed[v] = 1u << v;
    for (NodeId w : g.out(v)) closed[v] |= 1u << w;
    if (g.in_degree(v) == 0) {
      forced |= 1u << v;
    } else {
      free_nodes.push_back(v);
    }
  }
  std::uint32_t forced_cover = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (forced & (1u << v)) forced_cover |= closed[v];
  }

  auto members_of = [&](std::uint32_t mask) {
    std::vector<NodeId> m;
    for (NodeId v = 0; v < n; ++v) {
      if (mask & (1u << v)) m.push_back(v);
    }
    return m;
  };

  bool found = false;
  double best_weight = 0.0;
  std::uint32_t best_mask = 0;
  const std::uint64_t combos = std::uint64_t{1} << free_nodes.size();
  for (std::uint64_t s = 0; s < combos; ++s) {
    std::uint32_t mask = forced;
    std::uint32_t cover = forced_cover;
    for (std::size_t i = 0; i < free_nodes.size(); ++i) {
      if (s & (std::uint64_t{1} << i)) {
        mask |= 1u << free_nodes[i];
        cover |= closed[free_nodes[i]];
      }
    }
    if (cover != all) continue;
    const double w = set_weight(members_of(mask), weights);
    if (!found || w < best_weight || (w == best_weight && members_of(mask) < members_of(best_mask))) {
      found = true;
      best_weight = w;
      best_mask = mask;
    }
  }
  DominatingSet d = detail::finish(g, weights, members_of(best_mask));
  d.coverage_complete = true;
  return d;
}

inline DominatingSet exact_min_weight_dominating_set(const MinerNetwork& net, const MinerStats& stats) {
  return exact_min_weight_dominating_set(net.graph(), stats.shares_for(net));
}

// Greedy minimum-weight set S whose dominated nodes (S and its
// out-neighbours) hold at least `theta` of the weight. Each step adds the
// node maximizing (newly dominated weight) / (own weight + 1e-12).
inline DominatingSet threshold_domination(const Digraph& g, std::span<const double> weights, double theta,
                                          std::size_t restarts, std::uint64_t seed) {
  if (!(theta > 0.0) || theta > 1.0) throw InvalidInput("threshold_domination: theta must lie in (0, 1]");
  DominatingSet d = detail::multi_start(g, weights, detail::Objective::threshold, theta, restarts, seed);
  if (d.coverage_complete && !(covered_weight(g, d.members, weights) >= theta - kThresholdTolerance)) {
    throw std::logic_error("threshold domination produced an invalid set");
  }
  return d;
}

inline DominatingSet threshold_domination(const MinerNetwork& net, const MinerStats& stats, double theta,
                                          std::size_t restarts, std::uint64_t seed) {
  return threshold_domination(net.graph(), stats.shares_for(net), theta, restarts, seed);
}

}  // namespace minergraph
