#pragma once

// Network serialization: GraphML, DOT, and flat nodes.csv / edges.csv that
// can be read back.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "minergraph/csv.hpp"
#include "minergraph/ingest.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/numeric.hpp"

namespace minergraph {

inline void write_graphml(std::ostream& out, const MinerNetwork& net, const MinerStats& stats) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"hash_share\" for=\"node\" attr.name=\"hash_share\" attr.type=\"double\"/>\n"
         "  <key id=\"blocks_mined\" for=\"node\" attr.name=\"blocks_mined\" attr.type=\"long\"/>\n"
         "  <key id=\"value_usd\" for=\"edge\" attr.name=\"value_usd\" attr.type=\"double\"/>\n"
         "  <key id=\"count\" for=\"edge\" attr.name=\"count\" attr.type=\"long\"/>\n"
         "  <graph id=\"miners\" edgedefault=\"directed\">\n";
  for (NodeId v = 0; v < net.node_count(); ++v) {
    const MinerStat* s = stats.find(net.address(v));
    out << "    <node id=\"" << net.address(v) << "\">\n"
        << "      <data key=\"hash_share\">" << format_double(s ? s->hash_share : 0.0) << "</data>\n"
        << "      <data key=\"blocks_mined\">" << (s ? s->blocks_mined : 0) << "</data>\n"
        << "    </node>\n";
  }
  for (const auto& e : net.edges()) {
    out << "    <edge source=\"" << net.address(e.from) << "\" target=\"" << net.address(e.to) << "\">\n"
        << "      <data key=\"value_usd\">" << format_double(e.attr.value_usd) << "</data>\n"
        << "      <data key=\"count\">" << e.attr.count << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

inline void write_dot(std::ostream& out, const MinerNetwork& net, const MinerStats& stats) {
  out << "digraph miners {\n";
  for (NodeId v = 0; v < net.node_count(); ++v) {
    const MinerStat* s = stats.find(net.address(v));
    out << "  \"" << net.address(v) << "\" [hash_share=" << format_double(s ? s->hash_share : 0.0)
        << ", blocks_mined=" << (s ? s->blocks_mined : 0) << "];\n";
  }
  for (const auto& e : net.edges()) {
    out << "  \"" << net.address(e.from) << "\" -> \"" << net.address(e.to)
        << "\" [value_usd=" << format_double(e.attr.value_usd) << ", count=" << e.attr.count << "];\n";
  }
  out << "}\n";
}

inline void write_edges_csv(std::ostream& out, const MinerNetwork& net) {
  out << "from,to,value_usd,count\n";
  for (const auto& e : net.edges()) {
    out << net.address(e.from) << ',' << net.address(e.to) << ',' << format_double(e.attr.value_usd) << ','
        << e.attr.count << '\n';
  }
}

inline void write_nodes_csv(std::ostream& out, const MinerNetwork& net, const MinerStats& stats) {
  out << "address,blocks_mined,hash_share,rank\n";
  for (NodeId v = 0; v < net.node_count(); ++v) {
    const MinerStat* s = stats.find(net.address(v));
    out << net.address(v) << ',' << (s ? s->blocks_mined : 0) << ',' << format_double(s ? s->hash_share : 0.0)
        << ',' << (s ? s->rank : 0) << '\n';
  }
}

struct LoadedNetwork {
  MinerNetwork network;
  MinerStats stats;
};

// Rebuilds a network and its statistics from nodes.csv and edges.csv.
// Shares are recomputed from blocks_mined.
inline LoadedNetwork read_network(std::istream& nodes_in, std::istream& edges_in, SliceIndex slice = {}) {
  std::vector<MinerStat> stats;
  std::uint64_t total = 0;
  {
    CsvReader csv(nodes_in);
    csv.expect_header({"address", "blocks_mined", "hash_share", "rank"});
    while (csv.next()) {
      csv.require_columns(4);
      MinerStat s;
      s.address = parse_address(csv, 0, "address");
      s.blocks_mined = csv.integer<std::uint64_t>(1, "blocks_mined");
      total += s.blocks_mined;
      stats.push_back(s);
    }
  }
  std::ranges::sort(stats, {}, &MinerStat::address);
  std::vector<Address> nodes;
  for (const auto& s : stats) nodes.push_back(s.address);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] == nodes[i - 1]) throw InvalidInput("nodes.csv: duplicate address " + nodes[i].str());
  }

  std::vector<Edge> edges;
  {
    CsvReader csv(edges_in);
    csv.expect_header({"from", "to", "value_usd", "count"});
    auto index = [&](const Address& a) {
      auto it = std::ranges::lower_bound(nodes, a);
      if (it == nodes.end() || *it != a) throw ParseError(csv.line_number(), "edge endpoint not in nodes: " + a.str());
      return static_cast<NodeId>(it - nodes.begin());
    };
    while (csv.next()) {
      csv.require_columns(4);
      Edge e;
      e.from = index(parse_address(csv, 0, "from"));
      e.to = index(parse_address(csv, 1, "to"));
      e.attr.value_usd = csv.real(2, "value_usd");
      e.attr.count = csv.integer<std::uint64_t>(3, "count");
      edges.push_back(e);
    }
  }
  std::ranges::sort(edges, [](const Edge& a, const Edge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return {MinerNetwork(std::move(nodes), std::move(edges), slice), MinerStats(std::move(stats), total)};
}

}  // namespace minergraph
