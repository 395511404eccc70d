#pragma once

// End-to-end analysis: ingest, slicing, per-slice metrics and report files.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "minergraph/concentration.hpp"
#include "minergraph/control.hpp"
#include "minergraph/csv.hpp"
#include "minergraph/export.hpp"
#include "minergraph/ingest.hpp"
#include "minergraph/log.hpp"
#include "minergraph/netbuild.hpp"
#include "minergraph/rng.hpp"
#include "minergraph/topology.hpp"

namespace minergraph {

inline constexpr int kReportSchemaVersion = 1;

struct RunConfig {
  std::filesystem::path blocks;
  std::filesystem::path transactions;
  std::filesystem::path prices;
  std::filesystem::path out;
  int window_days = 30;
  std::string slice = "all";  // "all", "last" or a slice number k
  std::size_t restarts = 64;
  std::uint64_t seed = 0;
  double theta = 0.51;
  std::set<std::string> formats{"csv", "json"};  // csv, json, graphml, dot
  std::size_t workers = 1;
};

struct IngestedChain {
  std::vector<BlockRecord> blocks;
  PriceSeries prices;
  std::vector<Address> miners;  // whole horizon
  FilterResult filtered;
  std::vector<std::string> warnings;
};

inline void require_readable(const std::filesystem::path& p, std::string_view what) {
  std::error_code ec;
  if (p.empty()) throw FileError(std::string(what), "path not given");
  if (!std::filesystem::is_regular_file(p, ec)) throw FileError(p.string(), "no such file");
}

// Blocks and prices are loaded whole; transactions are streamed and only the
// miner-to-miner subset is kept.
inline IngestedChain ingest_chain(const std::filesystem::path& blocks_path, const std::filesystem::path& tx_path,
                                  const std::filesystem::path& prices_path) {
  require_readable(blocks_path, "blocks");
  require_readable(tx_path, "transactions");
  require_readable(prices_path, "prices");
  auto with_path = [](const std::filesystem::path& p, auto&& fn) {
    try {
      return fn();
    } catch (const FileError&) {
      throw;
    } catch (const Error& e) {
      throw FileError(p.string(), e.what());
    }
  };
  IngestedChain chain;
  chain.blocks = with_path(blocks_path, [&] {
    InputFile f(blocks_path);
    return parse_blocks(f.stream(), &chain.warnings);
  });
  if (chain.blocks.empty()) throw FileError(blocks_path.string(), "no blocks");
  chain.prices = with_path(prices_path, [&] {
    InputFile f(prices_path);
    return parse_prices(f.stream());
  });
  if (chain.prices.empty()) throw FileError(prices_path.string(), "no prices");
  chain.miners = miner_set(chain.blocks, chain.blocks.back().block_number);
  chain.filtered = with_path(tx_path, [&] {
    InputFile f(tx_path);
    return filter_miner_tx(f.stream(), chain.miners, chain.prices, chain.blocks);
  });
  log::info("ingested " + std::to_string(chain.blocks.size()) + " blocks, " +
            std::to_string(chain.filtered.tally.input) + " transactions, " +
            std::to_string(chain.filtered.tally.kept) + " between miners");
  return chain;
}

// Every analysis of one slice.
struct SliceAnalysis {
  SliceIndex slice;
  std::uint64_t n_blocks = 0;
  MinerNetwork network;
  MinerStats stats;
  std::vector<double> shares;  // by network node

  double gini_blocks = 0.0;
  std::optional<double> gini_edge_values;
  double hhi = 0.0;
  double top10_share = 0.0;
  std::optional<double> density_all;
  std::optional<double> density_connected;
  std::size_t n_connected = 0;
  double total_value_usd = 0.0;
  std::uint64_t n_transactions = 0;
  DegreeProfile degrees;
  std::vector<Role> roles;

  WccSummary wcc;
  std::vector<NodeId> gwcc_nodes;  // network ids
  MinerNetwork gwcc;
  std::vector<double> gwcc_shares;
  std::vector<Role> gwcc_roles;
  double gwcc_value_usd = 0.0;
  FlowMatrix flows;

  Partition scc;               // whole network
  Partition gwcc_scc;          // GWCC-induced network
  SccReport scc_report;        // GWCC-induced network
  std::size_t scc_count_mixed_only = 0;
  std::size_t scc_count_network = 0;

  HierarchyReport against;     // GWCC
  DriverSet drivers;           // GWCC
  DominatingSet dominating;    // GWCC
  DominatingSet threshold;     // whole network
};

inline std::size_t count_multi_member(const Partition& p) {
  std::size_t n = 0;
  for (auto s : p.sizes()) n += s >= 2 ? 1 : 0;
  return n;
}

inline SliceAnalysis analyze_slice(const IngestedChain& chain, const SliceIndex& slice, const RunConfig& cfg) {
  SliceAnalysis a;
  a.slice = slice;
  a.network = build_network(chain.filtered.transactions, chain.blocks, slice);
  a.stats = hash_stats(chain.blocks, slice);
  a.n_blocks = a.stats.total_blocks();
  a.shares = a.stats.shares_for(a.network);
  const MinerNetwork& net = a.network;

  std::vector<double> blocks_mined;
  for (const auto& s : a.stats.by_address()) blocks_mined.push_back(static_cast<double>(s.blocks_mined));
  a.gini_blocks = gini(blocks_mined);
  std::vector<double> edge_values;
  for (const auto& e : net.edges()) {
    edge_values.push_back(e.attr.value_usd);
    a.n_transactions += e.attr.count;
  }
  a.total_value_usd = net.total_value_usd();
  if (!edge_values.empty() && a.total_value_usd > 0.0) a.gini_edge_values = gini(edge_values);
  a.hhi = hhi(a.stats);
  a.top10_share = top_n_share(a.stats, 10);
  if (net.node_count() >= 2) a.density_all = density(net);
  a.density_connected = connected_density(net);
  a.n_connected = connected_node_count(net);
  a.degrees = degree_profile(net);
  a.roles = classify_roles(net);

  a.wcc = weakly_connected_components(net, a.shares);
  a.gwcc_nodes = component_nodes(a.wcc.partition, a.wcc.gwcc);
  a.gwcc = induced_subgraph(net, a.gwcc_nodes);
  a.gwcc_shares = a.stats.shares_for(a.gwcc);
  a.gwcc_roles = classify_roles(a.gwcc);
  a.gwcc_value_usd = a.gwcc.total_value_usd();
  a.flows = component_flows(a.gwcc, a.gwcc_roles);

  a.scc = strongly_connected_components(net.graph());
  a.scc_count_network = count_multi_member(a.scc);
  a.gwcc_scc = strongly_connected_components(a.gwcc.graph());
  a.scc_report = scc_stats(a.gwcc, a.gwcc_scc, a.gwcc_shares);
  {
    std::vector<NodeId> mixed;
    for (NodeId v = 0; v < a.gwcc.node_count(); ++v) {
      if (a.gwcc_roles[v] == Role::mixed) mixed.push_back(v);
    }
    const MinerNetwork core = induced_subgraph(a.gwcc, mixed);
    a.scc_count_mixed_only = count_multi_member(strongly_connected_components(core.graph()));
  }

  a.against = against_hierarchy(a.gwcc, a.stats);
  a.drivers = driver_nodes(a.gwcc);
  a.dominating = greedy_min_weight_dominating_set(a.gwcc.graph(), a.gwcc_shares, cfg.restarts,
                                                  derive_seed(cfg.seed, "dominating", slice.k));
  a.threshold = threshold_domination(net.graph(), a.shares, cfg.theta, cfg.restarts,
                                     derive_seed(cfg.seed, "threshold", slice.k));
  return a;
}

inline std::vector<SliceIndex> select_slices(const std::vector<SliceIndex>& all, const std::string& selection) {
  if (selection == "all") return all;
  if (selection == "last") return {all.back()};
  std::size_t k = 0;
  const auto res = std::from_chars(selection.data(), selection.data() + selection.size(), k);
  if (res.ec != std::errc{} || res.ptr != selection.data() + selection.size() || k < 1 || k > all.size()) {
    throw InvalidInput("--slice must be all, last or 1.." + std::to_string(all.size()) + ", got '" + selection + "'");
  }
  return {all[k - 1]};
}

inline std::vector<SliceAnalysis> analyze_slices(const IngestedChain& chain, const std::vector<SliceIndex>& slices,
                                                 const RunConfig& cfg) {
  std::vector<SliceAnalysis> results(slices.size());
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, std::max<std::size_t>(slices.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < slices.size(); ++i) results[i] = analyze_slice(chain, slices[i], cfg);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < slices.size(); i = next++) {
          try {
            results[i] = analyze_slice(chain, slices[i], cfg);
          } catch (...) {
            std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

namespace detail {

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline double share_sum(std::span<const NodeId> members, std::span<const double> shares) {
  return set_weight(members, shares);
}

inline std::string_view correlation_status(CorrelationStatus s) {
  switch (s) {
    case CorrelationStatus::ok: return "ok";
    case CorrelationStatus::too_few_points: return "too_few_points";
    case CorrelationStatus::zero_variance: return "zero_variance";
  }
  return "?";
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  AtomicFile f(path);
  f.stream() << content;
  f.commit();
}

template <typename Fn>
void write_with(const std::filesystem::path& path, Fn&& fn) {
  AtomicFile f(path);
  fn(f.stream());
  f.commit();
}

}  // namespace detail

inline nlohmann::ordered_json control_json(const SliceAnalysis& a) {
  nlohmann::ordered_json j;
  j["k"] = a.slice.k;
  j["gwcc_id"] = a.wcc.gwcc;
  j["against"] = {{"count", a.against.against.size()},
                  {"value_usd", a.against.against_value_usd},
                  {"fraction", a.total_value_usd > 0.0 ? a.against.against_value_usd / a.total_value_usd : 0.0},
                  {"fraction_of_gwcc_value", a.against.against_fraction_of_value},
                  {"mean_climb_pct", a.against.mean_rank_climb_pct},
                  {"with_count", a.against.with_count},
                  {"tied_count", a.against.tied_count}};
  const double gwcc_hash = a.wcc.hash_share[a.wcc.gwcc];
  const double driver_hash = detail::share_sum(a.drivers.drivers, a.gwcc_shares);
  j["drivers"] = {{"n_d", a.drivers.n_d},
                  {"hash_share", driver_hash},
                  {"hash_share_of_gwcc", gwcc_hash > 0.0 ? driver_hash / gwcc_hash : 0.0},
                  {"reachable_fraction", a.drivers.reachable_fraction},
                  {"matching_size", a.drivers.matching.size}};
  j["dominating"] = {{"size", a.dominating.members.size()},
                     {"hash_share", a.dominating.total_hash_share},
                     {"hash_share_of_gwcc", gwcc_hash > 0.0 ? a.dominating.total_hash_share / gwcc_hash : 0.0},
                     {"coverage_complete", a.dominating.coverage_complete}};
  j["threshold"] = {{"theta", 0.0},
                    {"size", a.threshold.members.size()},
                    {"hash_share", a.threshold.total_hash_share},
                    {"covered", a.threshold.covered_hash_share},
                    {"coverage_complete", a.threshold.coverage_complete}};
  return j;
}

inline nlohmann::ordered_json slice_json(const SliceAnalysis& a, const RunConfig& cfg) {
  nlohmann::ordered_json s;
  s["k"] = a.slice.k;
  s["last_block"] = a.slice.last_block;
  s["n_blocks"] = a.n_blocks;
  s["network"] = {{"n_miners", a.network.node_count()},
                  {"n_connected", a.n_connected},
                  {"n_edges", a.network.edge_count()},
                  {"n_transactions", a.n_transactions},
                  {"total_value_usd", a.total_value_usd},
                  {"deferred_transactions", a.network.deferred_count},
                  {"deferred_value_usd", a.network.deferred_value_usd}};
  s["gini"] = {{"blocks", a.gini_blocks}, {"edge_values", detail::optional_number(a.gini_edge_values)}};
  s["hhi"] = a.hhi;
  s["top10_share"] = a.top10_share;
  s["density"] = {{"all", detail::optional_number(a.density_all)},
                  {"connected", detail::optional_number(a.density_connected)}};
  s["degree"] = {{"mean_wdeg", a.degrees.mean_weighted_degree()}, {"median_wdeg", a.degrees.median_weighted_degree()}};
  const RoleCounts rc = count_roles(a.roles);
  s["roles"] = {{"sender", rc.sender}, {"receiver", rc.receiver}, {"mixed", rc.mixed}, {"isolated", rc.isolated}};

  const RoleCounts gr = count_roles(a.gwcc_roles);
  nlohmann::ordered_json role_hash;
  for (Role r : {Role::sender, Role::receiver, Role::mixed}) {
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < a.gwcc.node_count(); ++v) {
      if (a.gwcc_roles[v] == r) nodes.push_back(v);
    }
    role_hash[std::string(role_name(r))] = detail::share_sum(nodes, a.gwcc_shares);
  }
  nlohmann::ordered_json flows;
  for (Role from : {Role::sender, Role::receiver, Role::mixed}) {
    for (Role to : {Role::sender, Role::receiver, Role::mixed}) {
      flows[std::string(role_name(from)) + "->" + std::string(role_name(to))] = a.flows(from, to);
    }
  }
  s["gwcc"] = {{"n_wcc", a.wcc.partition.count},
               {"id", a.wcc.gwcc},
               {"size", a.gwcc.node_count()},
               {"n_edges", a.gwcc.edge_count()},
               {"hash_share", a.wcc.hash_share[a.wcc.gwcc]},
               {"value_usd", a.gwcc_value_usd},
               {"value_fraction", a.total_value_usd > 0.0 ? a.gwcc_value_usd / a.total_value_usd : 0.0},
               {"roles", {{"sender", gr.sender}, {"receiver", gr.receiver}, {"mixed", gr.mixed}}},
               {"role_hash_share", role_hash},
               {"flows", flows}};

  const auto& sr = a.scc_report;
  std::vector<double> sizes;
  std::size_t max_size = 0;
  CompensatedSum scc_hash;
  CompensatedSum scc_value;
  for (const auto& c : sr.components) {
    sizes.push_back(static_cast<double>(c.members.size()));
    max_size = std::max(max_size, c.members.size());
    scc_hash += c.hash_share;
    scc_value += c.internal_value;
  }
  s["scc"] = {{"count", sr.components.size()},
              {"count_mixed_only", a.scc_count_mixed_only},
              {"count_network", a.scc_count_network},
              {"nodes", sr.node_count()},
              {"singletons", sr.singletons},
              {"mean_size", sizes.empty() ? nlohmann::ordered_json(nullptr)
                                          : nlohmann::ordered_json(compensated_sum(sizes) / static_cast<double>(sizes.size()))},
              {"median_size", sizes.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(lower_median(sizes))},
              {"max_size", max_size},
              {"hash_share", scc_hash.value()},
              {"internal_value_usd", scc_value.value()},
              {"pearson_r", detail::finite_or_null(sr.correlation.r)},
              {"p_value", detail::finite_or_null(sr.correlation.p_value)},
              {"correlation_status", detail::correlation_status(sr.correlation.status)}};

  auto control = control_json(a);
  control["threshold"]["theta"] = cfg.theta;
  s["against"] = control["against"];
  s["drivers"] = control["drivers"];
  s["dominating"] = control["dominating"];
  s["threshold"] = control["threshold"];
  return s;
}

inline nlohmann::ordered_json report_json(const IngestedChain& chain, const std::vector<SliceIndex>& all_slices,
                                          const std::vector<SliceAnalysis>& analyses, const RunConfig& cfg) {
  nlohmann::ordered_json r;
  r["schema_version"] = kReportSchemaVersion;
  r["config"] = {{"window_days", cfg.window_days},
                 {"slice", cfg.slice},
                 {"restarts", cfg.restarts},
                 {"seed", cfg.seed},
                 {"theta", cfg.theta}};
  const auto& t = chain.filtered.tally;
  r["ingest"] = {{"blocks", chain.blocks.size()},
                 {"miners", chain.miners.size()},
                 {"transactions", t.input},
                 {"miner_transactions", t.kept},
                 {"dropped_transactions", t.dropped},
                 {"self_transactions", t.self},
                 {"timestamp_warnings", chain.warnings.size()}};
  r["slices_total"] = all_slices.size();
  r["blocks_per_window"] = all_slices.front().blocks_per_window;
  auto& slices = r["slices"] = nlohmann::ordered_json::array();
  for (const auto& a : analyses) slices.push_back(slice_json(a, cfg));
  return r;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<SliceAnalysis>& analyses) {
  out << "k,last_block,n_miners,n_edges,total_value_usd,gini_blocks,hhi,top10_share,density_all,density_connected,"
         "mean_wdeg,median_wdeg\n";
  for (const auto& a : analyses) {
    out << a.slice.k << ',' << a.slice.last_block << ',' << a.network.node_count() << ',' << a.network.edge_count()
        << ',' << format_double(a.total_value_usd) << ',' << format_double(a.gini_blocks) << ','
        << format_double(a.hhi) << ',' << format_double(a.top10_share) << ',' << detail::optional_field(a.density_all)
        << ',' << detail::optional_field(a.density_connected) << ',' << format_double(a.degrees.mean_weighted_degree())
        << ',' << format_double(a.degrees.median_weighted_degree()) << '\n';
  }
}

// Per-figure tidy series across the analysed slices.
inline void write_series(const std::filesystem::path& out, const std::vector<SliceAnalysis>& analyses) {
  const SliceAnalysis& last = analyses.back();
  detail::write_with(out / "series_concentration.csv", [&](std::ostream& o) {
    o << "k,last_block,gini_blocks,hhi,top10_share\n";
    for (const auto& a : analyses) {
      o << a.slice.k << ',' << a.slice.last_block << ',' << format_double(a.gini_blocks) << ','
        << format_double(a.hhi) << ',' << format_double(a.top10_share) << '\n';
    }
  });
  detail::write_with(out / "series_top10.csv", [&](std::ostream& o) {
    o << "k,address,final_rank,rank,hash_share\n";
    const std::size_t top = std::min<std::size_t>(10, last.stats.size());
    for (const auto& a : analyses) {
      for (std::size_t r = 1; r <= top; ++r) {
        const Address& addr = last.stats.ranked(r).address;
        const MinerStat* s = a.stats.find(addr);
        o << a.slice.k << ',' << addr << ',' << r << ',' << (s ? s->rank : 0) << ','
          << format_double(s ? s->hash_share : 0.0) << '\n';
      }
    }
  });
  detail::write_with(out / "series_edge_values.csv", [&](std::ostream& o) {
    o << "rank,from,to,value_usd,count\n";
    std::vector<const Edge*> edges;
    for (const auto& e : last.network.edges()) edges.push_back(&e);
    std::ranges::stable_sort(edges, [](const Edge* x, const Edge* y) { return x->attr.value_usd > y->attr.value_usd; });
    for (std::size_t i = 0; i < edges.size(); ++i) {
      o << i + 1 << ',' << last.network.address(edges[i]->from) << ',' << last.network.address(edges[i]->to) << ','
        << format_double(edges[i]->attr.value_usd) << ',' << edges[i]->attr.count << '\n';
    }
  });
  detail::write_with(out / "series_window_value.csv", [&](std::ostream& o) {
    o << "k,last_block,window_value_usd,window_transactions,cumulative_value_usd,cumulative_transactions\n";
    double previous_value = 0.0;
    std::uint64_t previous_count = 0;
    for (const auto& a : analyses) {
      o << a.slice.k << ',' << a.slice.last_block << ',' << format_double(a.total_value_usd - previous_value) << ','
        << a.n_transactions - previous_count << ',' << format_double(a.total_value_usd) << ',' << a.n_transactions
        << '\n';
      previous_value = a.total_value_usd;
      previous_count = a.n_transactions;
    }
  });
  detail::write_with(out / "series_density.csv", [&](std::ostream& o) {
    o << "k,n_miners,n_connected,n_edges,density_all,density_connected\n";
    for (const auto& a : analyses) {
      o << a.slice.k << ',' << a.network.node_count() << ',' << a.n_connected << ',' << a.network.edge_count() << ','
        << detail::optional_field(a.density_all) << ',' << detail::optional_field(a.density_connected) << '\n';
    }
  });
  detail::write_with(out / "series_degrees.csv", [&](std::ostream& o) {
    o << "address,w_in,w_out,d_in,d_out,role\n";
    for (NodeId v = 0; v < last.network.node_count(); ++v) {
      o << last.network.address(v) << ',' << format_double(last.degrees.w_in[v]) << ','
        << format_double(last.degrees.w_out[v]) << ',' << last.degrees.d_in[v] << ',' << last.degrees.d_out[v] << ','
        << role_name(last.roles[v]) << '\n';
    }
  });
}

inline void write_slice_files(const std::filesystem::path& dir, const SliceAnalysis& a, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  const MinerNetwork& net = a.network;
  const MinerNetwork& g = a.gwcc;
  const bool csv = cfg.formats.contains("csv");
  if (csv) {
    detail::write_with(dir / "nodes.csv", [&](std::ostream& o) { write_nodes_csv(o, net, a.stats); });
    detail::write_with(dir / "edges.csv", [&](std::ostream& o) { write_edges_csv(o, net); });
    detail::write_with(dir / "components.csv", [&](std::ostream& o) {
      o << "node,wcc_id,scc_id,role\n";
      for (NodeId v = 0; v < net.node_count(); ++v) {
        o << net.address(v) << ',' << a.wcc.partition.id[v] << ',' << a.scc.id[v] << ',' << role_name(a.roles[v])
          << '\n';
      }
    });
    detail::write_with(dir / "flows.csv", [&](std::ostream& o) {
      o << "from_role,to_role,value_usd\n";
      for (Role from : {Role::sender, Role::receiver, Role::mixed}) {
        for (Role to : {Role::sender, Role::receiver, Role::mixed}) {
          o << role_name(from) << ',' << role_name(to) << ',' << format_double(a.flows(from, to)) << '\n';
        }
      }
    });
    detail::write_with(dir / "scc_stats.csv", [&](std::ostream& o) {
      o << "scc_id,size,hash_share,internal_value\n";
      for (const auto& c : a.scc_report.components) {
        o << a.scc.id[*net.index_of(g.address(c.members.front()))] << ',' << c.members.size() << ','
          << format_double(c.hash_share) << ',' << format_double(c.internal_value) << '\n';
      }
    });
    auto member_list = [&](const std::filesystem::path& path, std::span<const NodeId> members, const MinerNetwork& n,
                           std::span<const double> shares) {
      detail::write_with(path, [&](std::ostream& o) {
        o << "address,hash_share\n";
        for (NodeId v : members) o << n.address(v) << ',' << format_double(shares[v]) << '\n';
      });
    };
    member_list(dir / "drivers.csv", a.drivers.drivers, g, a.gwcc_shares);
    member_list(dir / "dominating.csv", a.dominating.members, g, a.gwcc_shares);
    member_list(dir / "threshold.csv", a.threshold.members, net, a.shares);
    detail::write_with(dir / "matching.csv", [&](std::ostream& o) {
      o << "from,to\n";
      for (const auto& [u, v] : a.drivers.matching.edges()) o << g.address(u) << ',' << g.address(v) << '\n';
    });
    detail::write_with(dir / "against.csv", [&](std::ostream& o) {
      o << "from,to,value_usd,climb_pct\n";
      for (std::size_t i = 0; i < a.against.against.size(); ++i) {
        const Edge& e = g.edges()[a.against.against[i]];
        o << g.address(e.from) << ',' << g.address(e.to) << ',' << format_double(e.attr.value_usd) << ','
          << format_double(a.against.climb_pct[i]) << '\n';
      }
    });
  }
  if (cfg.formats.contains("json")) {
    auto control = control_json(a);
    control["threshold"]["theta"] = cfg.theta;
    detail::write_file(dir / "control.json", control.dump(2) + "\n");
  }
  if (cfg.formats.contains("graphml")) {
    detail::write_with(dir / "network.graphml", [&](std::ostream& o) { write_graphml(o, net, a.stats); });
  }
  if (cfg.formats.contains("dot")) {
    detail::write_with(dir / "network.dot", [&](std::ostream& o) { write_dot(o, net, a.stats); });
  }
}

inline std::filesystem::path slice_dir(const std::filesystem::path& out, std::size_t k) {
  return out / "slices" / ("k" + std::to_string(k));
}

struct PipelineResult {
  std::vector<SliceIndex> all_slices;
  std::vector<SliceAnalysis> analyses;
  nlohmann::ordered_json report;
};

// ingest -> netbuild -> concentration -> topology -> control, then writes
// report.json, metrics.csv, series_*.csv and slices/k<k>/ files under cfg.out.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  for (const auto& f : cfg.formats) {
    if (f != "csv" && f != "json" && f != "graphml" && f != "dot") throw InvalidInput("unknown format '" + f + "'");
  }
  if (cfg.window_days <= 0) throw InvalidInput("--window-days must be positive");
  if (!(cfg.theta > 0.0) || cfg.theta > 1.0) throw InvalidInput("theta must lie in (0, 1]");
  const IngestedChain chain = ingest_chain(cfg.blocks, cfg.transactions, cfg.prices);
  PipelineResult result;
  result.all_slices = slice_boundaries(chain.blocks, cfg.window_days);
  const auto selected = select_slices(result.all_slices, cfg.slice);
  log::info("analysing " + std::to_string(selected.size()) + " of " + std::to_string(result.all_slices.size()) +
            " slices");
  result.analyses = analyze_slices(chain, selected, cfg);
  result.report = report_json(chain, result.all_slices, result.analyses, cfg);

  std::filesystem::create_directories(cfg.out);
  for (const auto& a : result.analyses) write_slice_files(slice_dir(cfg.out, a.slice.k), a, cfg);
  if (cfg.formats.contains("csv")) {
    detail::write_with(cfg.out / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, result.analyses); });
    write_series(cfg.out, result.analyses);
  }
  detail::write_file(cfg.out / "report.json", result.report.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Re-checking emitted sets

struct VerifyReport {
  std::vector<std::pair<std::string, bool>> checks;
  bool ok() const {
    return std::ranges::all_of(checks, [](const auto& c) { return c.second; });
  }
};

inline std::vector<Address> read_address_column(const std::filesystem::path& path, std::vector<std::string_view> header) {
  InputFile f(path);
  CsvReader csv(f.stream());
  csv.expect_header(header);
  std::vector<Address> out;
  while (csv.next()) out.push_back(parse_address(csv, 0, header.front()));
  return out;
}

// Re-verifies the sets of a slice directory written by run_pipeline: the
// dominating set covers the GWCC, the threshold set reaches theta, the
// matching is valid and maximum, and drivers are its unmatched heads.
inline VerifyReport verify_slice_dir(const std::filesystem::path& dir) {
  VerifyReport report;
  LoadedNetwork loaded = [&] {
    InputFile nodes(dir / "nodes.csv");
    InputFile edges(dir / "edges.csv");
    return read_network(nodes.stream(), edges.stream());
  }();
  const MinerNetwork& net = loaded.network;
  nlohmann::json control;
  {
    InputFile f(dir / "control.json");
    control = nlohmann::json::parse(f.stream());
  }
  const std::size_t gwcc_id = control.at("gwcc_id").get<std::size_t>();
  const double theta = control.at("threshold").at("theta").get<double>();

  std::vector<NodeId> gwcc_nodes;
  {
    InputFile f(dir / "components.csv");
    CsvReader csv(f.stream());
    csv.expect_header({"node", "wcc_id", "scc_id", "role"});
    while (csv.next()) {
      const Address a = parse_address(csv, 0, "node");
      const auto v = net.index_of(a);
      if (!v) throw ParseError(csv.line_number(), "unknown node " + a.str());
      if (csv.integer<std::size_t>(1, "wcc_id") == gwcc_id) gwcc_nodes.push_back(*v);
    }
  }
  const MinerNetwork gwcc = induced_subgraph(net, gwcc_nodes);
  auto ids_in = [](const MinerNetwork& n, const std::vector<Address>& addrs, bool& ok) {
    std::vector<NodeId> ids;
    for (const auto& a : addrs) {
      if (auto v = n.index_of(a)) {
        ids.push_back(*v);
      } else {
        ok = false;
      }
    }
    return ids;
  };

  {
    bool ok = true;
    const auto members = ids_in(gwcc, read_address_column(dir / "dominating.csv", {"address", "hash_share"}), ok);
    report.checks.emplace_back("dominating set covers the GWCC", ok && verify_domination(gwcc.graph(), members));
  }
  {
    bool ok = true;
    const auto members = ids_in(net, read_address_column(dir / "threshold.csv", {"address", "hash_share"}), ok);
    const double covered = covered_weight(net.graph(), members, loaded.stats.shares_for(net));
    report.checks.emplace_back("threshold set covers theta of hash power", ok && covered >= theta - kThresholdTolerance);
  }
  {
    bool ok = true;
    std::vector<std::pair<NodeId, NodeId>> matching;
    {
      InputFile f(dir / "matching.csv");
      CsvReader csv(f.stream());
      csv.expect_header({"from", "to"});
      while (csv.next()) {
        const auto u = gwcc.index_of(parse_address(csv, 0, "from"));
        const auto v = gwcc.index_of(parse_address(csv, 1, "to"));
        if (!u || !v) {
          ok = false;
          continue;
        }
        matching.emplace_back(*u, *v);
      }
    }
    ok = ok && is_valid_matching(gwcc.graph(), matching);
    report.checks.emplace_back("matching is valid", ok);
    report.checks.emplace_back("matching is maximum", ok && matching.size() == maximum_matching(gwcc.graph()).size);

    std::vector<bool> head_matched(gwcc.node_count(), false);
    for (const auto& [u, v] : matching) head_matched[v] = true;
    std::vector<NodeId> expected;
    for (NodeId v = 0; v < gwcc.node_count(); ++v) {
      if (!head_matched[v]) expected.push_back(v);
    }
    if (expected.empty() && gwcc.node_count() > 0) expected.push_back(0);
    bool drivers_ok = true;
    auto drivers = ids_in(gwcc, read_address_column(dir / "drivers.csv", {"address", "hash_share"}), drivers_ok);
    std::ranges::sort(drivers);
    report.checks.emplace_back("drivers are the unmatched nodes", drivers_ok && drivers == expected);
  }
  return report;
}

// Validates and normalizes the three inputs into `out` (lowercase addresses,
// blocks sorted) and writes ingest.json with the filter tallies.
inline nlohmann::ordered_json run_ingest(const RunConfig& cfg) {
  const IngestedChain chain = ingest_chain(cfg.blocks, cfg.transactions, cfg.prices);
  std::filesystem::create_directories(cfg.out);
  detail::write_with(cfg.out / "blocks.csv", [&](std::ostream& o) { write_blocks(o, chain.blocks); });
  detail::write_with(cfg.out / "prices.csv", [&](std::ostream& o) { write_prices(o, chain.prices); });
  detail::write_with(cfg.out / "transactions.csv", [&](std::ostream& o) {
    InputFile in(cfg.transactions);
    write_transaction_header(o);
    for_each_transaction(in.stream(), [&](const TxRecord& tx, std::size_t) { write_transaction(o, tx); });
  });
  detail::write_with(cfg.out / "miner_transactions.csv", [&](std::ostream& o) {
    o << "block_number,tx_index,from_address,to_address,value_wei,value_usd\n";
    for (const auto& tx : chain.filtered.transactions) {
      o << tx.block_number << ',' << tx.tx_index << ',' << tx.from << ',' << tx.to << ',' << wei_to_string(tx.value_wei)
        << ',' << format_double(tx.value_usd) << '\n';
    }
  });
  const auto& t = chain.filtered.tally;
  nlohmann::ordered_json summary = {{"blocks", chain.blocks.size()},
                                    {"miners", chain.miners.size()},
                                    {"price_days", chain.prices.points().size()},
                                    {"transactions", t.input},
                                    {"miner_transactions", t.kept},
                                    {"dropped_transactions", t.dropped},
                                    {"self_transactions", t.self},
                                    {"warnings", chain.warnings}};
  detail::write_file(cfg.out / "ingest.json", summary.dump(2) + "\n");
  return summary;
}

}  // namespace minergraph
