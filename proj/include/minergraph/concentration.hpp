#pragma once

// Concentration and degree statistics over a slice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ranges>
#include <span>
#include <string_view>
#include <vector>

#include "minergraph/error.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/numeric.hpp"

namespace minergraph {

// Gini coefficient of a non-negative distribution:
//   G = sum_i (2i - n - 1) x_(i) / (n sum x),  x sorted ascending, i = 1..n.
template <std::ranges::input_range R>
double gini(R&& values) {
  std::vector<double> x(std::ranges::begin(values), std::ranges::end(values));
  if (x.empty()) throw InvalidInput("gini: empty input");
  for (double v : x) {
    if (!(v >= 0.0)) throw InvalidInput("gini: negative or NaN value");
  }
  std::ranges::sort(x);
  const double n = static_cast<double>(x.size());
  CompensatedSum total;
  CompensatedSum weighted;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += x[i];
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * x[i];
  }
  if (!(total.value() > 0.0)) throw InvalidInput("gini: values sum to zero");
  return weighted.value() / (n * total.value());
}

// Herfindahl-Hirschman index over percentage shares (sum 100).
template <std::ranges::input_range R>
double hhi(R&& percent_shares) {
  CompensatedSum total;
  CompensatedSum squares;
  std::size_t n = 0;
  for (double s : percent_shares) {
    if (!(s >= 0.0)) throw InvalidInput("hhi: negative share");
    total += s;
    squares += s * s;
    ++n;
  }
  if (n == 0 || std::fabs(total.value() - 100.0) > 1e-6) throw InvalidInput("hhi: shares must sum to 100");
  return squares.value();
}

inline double hhi(const MinerStats& stats) {
  std::vector<double> percent;
  percent.reserve(stats.size());
  for (const auto& s : stats.by_address()) percent.push_back(100.0 * s.hash_share);
  return hhi(percent);
}

// Combined share of the n top-ranked miners (all of them if n > N).
inline double top_n_share(const MinerStats& stats, std::size_t n) {
  if (n < 1) throw InvalidInput("top_n_share: n must be >= 1");
  CompensatedSum s;
  for (std::size_t r = 1; r <= std::min(n, stats.size()); ++r) s += stats.ranked(r).hash_share;
  return s.value();
}

inline double density(std::size_t node_count, std::size_t edge_count) {
  if (node_count < 2) throw InvalidInput("density: fewer than two nodes");
  const double n = static_cast<double>(node_count);
  return static_cast<double>(edge_count) / (n * (n - 1.0));
}

// |E| / (|V| (|V| - 1)) over all miners of the slice.
inline double density(const MinerNetwork& net) { return density(net.node_count(), net.edge_count()); }

// Miners with at least one relationship.
inline std::size_t connected_node_count(const MinerNetwork& net) {
  std::size_t n = 0;
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (net.graph().in_degree(v) + net.graph().out_degree(v) > 0) ++n;
  }
  return n;
}

// Density over miners with at least one relationship; empty when fewer
// than two such miners exist.
inline std::optional<double> connected_density(const MinerNetwork& net) {
  const std::size_t n = connected_node_count(net);
  if (n < 2) return std::nullopt;
  return density(n, net.edge_count());
}

struct DegreeProfile {
  std::vector<double> w_in;
  std::vector<double> w_out;
  std::vector<std::size_t> d_in;
  std::vector<std::size_t> d_out;

  std::size_t size() const noexcept { return w_in.size(); }

  // Total weighted degree of one node.
  double weighted_degree(NodeId v) const { return w_in[v] + w_out[v]; }

  // Average weighted degree of the directed network: sum w_in / |V| (equal
  // to the out-side average). Zero on an empty graph.
  double mean_weighted_degree() const {
    if (w_in.empty()) return 0.0;
    return compensated_sum(w_in) / static_cast<double>(w_in.size());
  }

  // Lower median of per-node total weighted degree w_in + w_out.
  double median_weighted_degree() const {
    std::vector<double> total(size());
    for (std::size_t v = 0; v < size(); ++v) total[v] = w_in[v] + w_out[v];
    return lower_median(total);
  }
};

inline DegreeProfile degree_profile(const MinerNetwork& net) {
  const std::size_t n = net.node_count();
  std::vector<CompensatedSum> in(n);
  std::vector<CompensatedSum> out(n);
  DegreeProfile p{std::vector<double>(n), std::vector<double>(n), std::vector<std::size_t>(n, 0),
                  std::vector<std::size_t>(n, 0)};
  for (const auto& e : net.edges()) {
    out[e.from] += e.attr.value_usd;
    in[e.to] += e.attr.value_usd;
    ++p.d_out[e.from];
    ++p.d_in[e.to];
  }
  for (std::size_t v = 0; v < n; ++v) {
    p.w_in[v] = in[v].value();
    p.w_out[v] = out[v].value();
  }
  return p;
}

enum class Role : std::uint8_t { sender, receiver, mixed, isolated };

inline constexpr std::string_view role_name(Role r) noexcept {
  switch (r) {
    case Role::sender: return "sender";
    case Role::receiver: return "receiver";
    case Role::mixed: return "mixed";
    case Role::isolated: return "isolated";
  }
  return "?";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::sender, Role::receiver, Role::mixed, Role::isolated}) {
    if (role_name(r) == s) return r;
  }
  return std::nullopt;
}

inline Role role_of(std::size_t in_degree, std::size_t out_degree) noexcept {
  if (in_degree > 0 && out_degree > 0) return Role::mixed;
  if (out_degree > 0) return Role::sender;
  if (in_degree > 0) return Role::receiver;
  return Role::isolated;
}

inline std::vector<Role> classify_roles(const MinerNetwork& net) {
  std::vector<Role> roles(net.node_count());
  for (NodeId v = 0; v < net.node_count(); ++v) {
    roles[v] = role_of(net.graph().in_degree(v), net.graph().out_degree(v));
  }
  return roles;
}

struct RoleCounts {
  std::size_t sender = 0;
  std::size_t receiver = 0;
  std::size_t mixed = 0;
  std::size_t isolated = 0;

  std::size_t& operator[](Role r) {
    switch (r) {
      case Role::sender: return sender;
      case Role::receiver: return receiver;
      case Role::mixed: return mixed;
      case Role::isolated: break;
    }
    return isolated;
  }
};

inline RoleCounts count_roles(std::span<const Role> roles) {
  RoleCounts c;
  for (Role r : roles) ++c[r];
  return c;
}

}  // namespace minergraph
