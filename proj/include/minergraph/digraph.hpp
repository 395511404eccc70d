#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace minergraph {

using NodeId = std::uint32_t;

// Immutable directed graph in compressed adjacency form (both directions).
// Parallel arcs are kept as given; callers pass deduplicated arcs.
class Digraph {
 public:
  Digraph() = default;

  Digraph(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> arcs)
      : n_(node_count),
        out_offsets_(node_count + 1, 0),
        in_offsets_(node_count + 1, 0),
        out_(arcs.size()),
        in_(arcs.size()) {
    for (const auto& [u, v] : arcs) {
      ++out_offsets_[u + 1];
      ++in_offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) {
      out_offsets_[i + 1] += out_offsets_[i];
      in_offsets_[i + 1] += in_offsets_[i];
    }
    std::vector<std::size_t> out_pos(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> in_pos(in_offsets_.begin(), in_offsets_.end() - 1);
    for (const auto& [u, v] : arcs) {
      out_[out_pos[u]++] = v;
      in_[in_pos[v]++] = u;
    }
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t arc_count() const noexcept { return out_.size(); }

  std::span<const NodeId> out(NodeId u) const noexcept {
    return {out_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
  }
  std::span<const NodeId> in(NodeId v) const noexcept {
    return {in_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }

  std::size_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const noexcept { return in_offsets_[v + 1] - in_offsets_[v]; }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeId> out_;
  std::vector<NodeId> in_;
};

}  // namespace minergraph
