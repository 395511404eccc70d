#pragma once

// Cumulative analysis slices, the miner transaction network of a slice, and
// per-slice hash-power statistics (share of blocks mined).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "minergraph/address.hpp"
#include "minergraph/digraph.hpp"
#include "minergraph/error.hpp"
#include "minergraph/ingest.hpp"
#include "minergraph/numeric.hpp"

namespace minergraph {

struct SliceIndex {
  std::size_t k = 1;               // 1-based
  std::uint64_t last_block = 0;    // inclusive
  std::uint64_t blocks_per_window = 0;

  friend bool operator==(const SliceIndex&, const SliceIndex&) = default;
};

// Average number of blocks per window: floor(total * window / span).
// A zero span yields `total_blocks`.
inline std::uint64_t blocks_per_window(std::uint64_t total_blocks, std::int64_t span_seconds, int window_days) {
  if (span_seconds <= 0) return total_blocks;
  const unsigned __int128 num = static_cast<unsigned __int128>(total_blocks) * static_cast<unsigned>(window_days) * 86400u;
  const auto bpw = static_cast<std::uint64_t>(num / static_cast<unsigned __int128>(span_seconds));
  return std::max<std::uint64_t>(bpw, 1);
}

// Number of slices K: full windows, with the trailing partial window merged
// into the last one; at least one slice.
inline std::size_t slice_count(std::uint64_t total_blocks, std::uint64_t per_window) {
  if (per_window == 0) return 1;
  return static_cast<std::size_t>(std::max<std::uint64_t>(total_blocks / per_window, 1));
}

// Timestamp span of the chain. A zero genesis timestamp (as on Ethereum
// mainnet) is skipped in favour of the first dated block.
inline std::int64_t chain_span_seconds(std::span<const BlockRecord> blocks) {
  if (blocks.empty()) return 0;
  std::int64_t first = blocks.front().timestamp;
  if (first == 0 && blocks.size() > 1) first = blocks[1].timestamp;
  return blocks.back().timestamp - first;
}

inline std::vector<SliceIndex> slice_boundaries(std::span<const BlockRecord> blocks, int window_days = 30) {
  if (blocks.empty()) throw InvalidInput("slice_boundaries: no blocks");
  if (window_days <= 0) throw InvalidInput("slice_boundaries: window_days must be positive");
  const std::uint64_t total = blocks.size();
  const std::uint64_t per_window = blocks_per_window(total, chain_span_seconds(blocks), window_days);
  const std::size_t count = slice_count(total, per_window);
  std::vector<SliceIndex> slices;
  slices.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    const std::uint64_t last = k == count ? blocks.back().block_number : blocks[k * per_window - 1].block_number;
    slices.push_back({k, last, per_window});
  }
  return slices;
}

struct EdgeAttr {
  double value_usd = 0.0;
  std::uint64_t count = 0;

  friend bool operator==(const EdgeAttr&, const EdgeAttr&) = default;
};

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  EdgeAttr attr;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed miner network of one slice. Nodes are sorted by address, so node
// ids order lexicographically; edges are sorted by (from, to).
class MinerNetwork {
 public:
  MinerNetwork() = default;

  MinerNetwork(std::vector<Address> nodes, std::vector<Edge> edges, SliceIndex slice)
      : nodes_(std::move(nodes)), edges_(std::move(edges)), slice_(slice) {
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i - 1] < nodes_[i])) throw InvalidInput("MinerNetwork: nodes must be sorted and unique");
    }
    std::vector<std::pair<NodeId, NodeId>> arcs;
    arcs.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.from >= nodes_.size() || e.to >= nodes_.size()) throw InvalidInput("MinerNetwork: edge endpoint out of range");
      if (e.from == e.to) throw InvalidInput("MinerNetwork: self-loop on " + nodes_[e.from].str());
      if (e.attr.count < 1 || !(e.attr.value_usd >= 0.0)) throw InvalidInput("MinerNetwork: invalid edge attributes");
      if (i > 0 && !(std::tie(edges_[i - 1].from, edges_[i - 1].to) < std::tie(e.from, e.to))) {
        throw InvalidInput("MinerNetwork: edges must be sorted and unique");
      }
      arcs.emplace_back(e.from, e.to);
    }
    graph_ = Digraph(nodes_.size(), arcs);
  }

  std::span<const Address> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const SliceIndex& slice() const noexcept { return slice_; }
  const Digraph& graph() const noexcept { return graph_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Address& address(NodeId v) const { return nodes_[v]; }

  std::optional<NodeId> index_of(const Address& a) const {
    auto it = std::ranges::lower_bound(nodes_, a);
    if (it == nodes_.end() || *it != a) return std::nullopt;
    return static_cast<NodeId>(it - nodes_.begin());
  }

  const EdgeAttr* find_edge(NodeId from, NodeId to) const {
    auto it = std::ranges::lower_bound(edges_, std::pair{from, to}, {},
                                       [](const Edge& e) { return std::pair{e.from, e.to}; });
    if (it == edges_.end() || it->from != from || it->to != to) return nullptr;
    return &it->attr;
  }

  double total_value_usd() const {
    CompensatedSum s;
    for (const auto& e : edges_) s += e.attr.value_usd;
    return s.value();
  }

  // Miner transactions up to the slice boundary that were left out because
  // an endpoint had not mined a block by then.
  std::size_t deferred_count = 0;
  double deferred_value_usd = 0.0;

 private:
  std::vector<Address> nodes_;
  std::vector<Edge> edges_;
  SliceIndex slice_;
  Digraph graph_;
};

// Cumulative network from genesis to slice.last_block. A transaction becomes
// an edge contribution once both endpoints have mined by the boundary.
// Aggregation runs in (block_number, tx_index) order, so the result does not
// depend on input order.
inline MinerNetwork build_network(std::span<const MinerTx> miner_txs, std::span<const BlockRecord> blocks,
                                  const SliceIndex& slice) {
  std::vector<Address> nodes = miner_set(blocks, slice.last_block);
  auto node_of = [&](const Address& a) -> std::optional<NodeId> {
    auto it = std::ranges::lower_bound(nodes, a);
    if (it == nodes.end() || *it != a) return std::nullopt;
    return static_cast<NodeId>(it - nodes.begin());
  };

  std::vector<const MinerTx*> eligible;
  for (const auto& tx : miner_txs) {
    if (tx.block_number <= slice.last_block) eligible.push_back(&tx);
  }
  std::ranges::sort(eligible, [](const MinerTx* a, const MinerTx* b) {
    return std::tie(a->block_number, a->tx_index, a->from, a->to) < std::tie(b->block_number, b->tx_index, b->from, b->to);
  });

  struct Contribution {
    std::uint64_t key;
    double value;
  };
  std::vector<Contribution> contributions;
  contributions.reserve(eligible.size());
  CompensatedSum deferred;
  std::size_t deferred_count = 0;
  for (const MinerTx* tx : eligible) {
    const auto u = node_of(tx->from);
    const auto v = node_of(tx->to);
    if (!u || !v) {
      deferred += tx->value_usd;
      ++deferred_count;
      continue;
    }
    if (*u == *v) continue;
    contributions.push_back({(static_cast<std::uint64_t>(*u) << 32) | *v, tx->value_usd});
  }
  std::ranges::stable_sort(contributions, {}, &Contribution::key);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < contributions.size();) {
    const std::uint64_t key = contributions[i].key;
    CompensatedSum value;
    std::uint64_t count = 0;
    for (; i < contributions.size() && contributions[i].key == key; ++i) {
      value += contributions[i].value;
      ++count;
    }
    edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xFFFFFFFFu), {value.value(), count}});
  }
  MinerNetwork net(std::move(nodes), std::move(edges), slice);
  net.deferred_count = deferred_count;
  net.deferred_value_usd = deferred.value();
  return net;
}

// Subgraph induced by `keep` (ids of `net`, any order). Node ids are
// renumbered in address order.
inline MinerNetwork induced_subgraph(const MinerNetwork& net, std::span<const NodeId> keep) {
  std::vector<NodeId> sorted(keep.begin(), keep.end());
  std::ranges::sort(sorted);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> remap(net.node_count(), kAbsent);
  std::vector<Address> nodes;
  nodes.reserve(sorted.size());
  for (NodeId v : sorted) {
    remap[v] = static_cast<NodeId>(nodes.size());
    nodes.push_back(net.address(v));
  }
  std::vector<Edge> edges;
  for (const auto& e : net.edges()) {
    if (remap[e.from] != kAbsent && remap[e.to] != kAbsent) edges.push_back({remap[e.from], remap[e.to], e.attr});
  }
  return MinerNetwork(std::move(nodes), std::move(edges), net.slice());
}

struct AddressEdge {
  Address from;
  Address to;
  EdgeAttr attr;
};

// Edges of `current` with the value and count added since `previous` (a
// network of an earlier slice). Edges with no new transactions are omitted.
inline std::vector<AddressEdge> window_delta(const MinerNetwork& previous, const MinerNetwork& current) {
  std::vector<AddressEdge> out;
  for (const auto& e : current.edges()) {
    const Address& from = current.address(e.from);
    const Address& to = current.address(e.to);
    EdgeAttr before;
    const auto pu = previous.index_of(from);
    const auto pv = previous.index_of(to);
    if (pu && pv) {
      if (const EdgeAttr* a = previous.find_edge(*pu, *pv)) before = *a;
    }
    if (e.attr.count == before.count) continue;
    out.push_back({from, to, {e.attr.value_usd - before.value_usd, e.attr.count - before.count}});
  }
  return out;
}

struct MinerStat {
  Address address;
  std::uint64_t blocks_mined = 0;
  double hash_share = 0.0;
  std::size_t rank = 0;  // 1 = most blocks; ties by address
};

// Hash-power proxy of one slice: share of blocks mined per miner.
class MinerStats {
 public:
  MinerStats() = default;

  // `stats` sorted by address; ranks and shares filled in here.
  MinerStats(std::vector<MinerStat> stats, std::uint64_t total_blocks)
      : by_address_(std::move(stats)), total_blocks_(total_blocks) {
    by_rank_.resize(by_address_.size());
    for (std::size_t i = 0; i < by_rank_.size(); ++i) by_rank_[i] = i;
    std::ranges::sort(by_rank_, [&](std::size_t a, std::size_t b) {
      if (by_address_[a].blocks_mined != by_address_[b].blocks_mined) {
        return by_address_[a].blocks_mined > by_address_[b].blocks_mined;
      }
      return by_address_[a].address < by_address_[b].address;
    });
    for (std::size_t r = 0; r < by_rank_.size(); ++r) {
      auto& s = by_address_[by_rank_[r]];
      s.rank = r + 1;
      s.hash_share = total_blocks_ == 0 ? 0.0 : static_cast<double>(s.blocks_mined) / static_cast<double>(total_blocks_);
    }
  }

  std::size_t size() const noexcept { return by_address_.size(); }
  std::uint64_t total_blocks() const noexcept { return total_blocks_; }
  std::span<const MinerStat> by_address() const noexcept { return by_address_; }

  // Miner with the given 1-based rank.
  const MinerStat& ranked(std::size_t rank) const { return by_address_[by_rank_.at(rank - 1)]; }

  const MinerStat* find(const Address& a) const {
    auto it = std::ranges::lower_bound(by_address_, a, {}, &MinerStat::address);
    if (it == by_address_.end() || it->address != a) return nullptr;
    return &*it;
  }

  const MinerStat& at(const Address& a) const {
    const MinerStat* s = find(a);
    if (s == nullptr) throw InvalidInput("no statistics for miner " + a.str());
    return *s;
  }

  // Per-node hash share of `net` (0 for addresses without statistics).
  std::vector<double> shares_for(const MinerNetwork& net) const {
    std::vector<double> out(net.node_count(), 0.0);
    for (NodeId v = 0; v < net.node_count(); ++v) {
      if (const MinerStat* s = find(net.address(v))) out[v] = s->hash_share;
    }
    return out;
  }

  std::vector<std::uint64_t> blocks_for(const MinerNetwork& net) const {
    std::vector<std::uint64_t> out(net.node_count(), 0);
    for (NodeId v = 0; v < net.node_count(); ++v) {
      if (const MinerStat* s = find(net.address(v))) out[v] = s->blocks_mined;
    }
    return out;
  }

 private:
  std::vector<MinerStat> by_address_;
  std::vector<std::size_t> by_rank_;
  std::uint64_t total_blocks_ = 0;
};

inline MinerStats hash_stats(std::span<const BlockRecord> blocks, const SliceIndex& slice) {
  std::vector<Address> mined;
  for (const auto& b : blocks) {
    if (b.block_number <= slice.last_block) mined.push_back(b.miner);
  }
  const std::uint64_t total = mined.size();
  std::ranges::sort(mined);
  std::vector<MinerStat> stats;
  for (std::size_t i = 0; i < mined.size();) {
    std::size_t j = i;
    while (j < mined.size() && mined[j] == mined[i]) ++j;
    stats.push_back({mined[i], j - i, 0.0, 0});
    i = j;
  }
  return MinerStats(std::move(stats), total);
}

}  // namespace minergraph
