#pragma once

// Seeded synthetic chain with known ground truth: pools paying their members,
// solo miners, planted coalitions with mutual transfers, and background
// transactions that do not involve two miners.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "minergraph/address.hpp"
#include "minergraph/concentration.hpp"
#include "minergraph/control.hpp"
#include "minergraph/csv.hpp"
#include "minergraph/error.hpp"
#include "minergraph/ingest.hpp"
#include "minergraph/rng.hpp"

namespace minergraph {

enum class MinerKind { pool, member, solo };

inline constexpr std::string_view kind_name(MinerKind k) noexcept {
  switch (k) {
    case MinerKind::pool: return "pool";
    case MinerKind::member: return "member";
    case MinerKind::solo: return "solo";
  }
  return "?";
}

// Refers to a generated miner: pool `group`, member `index` of pool
// `group`, or solo miner `index`.
struct MinerRef {
  MinerKind kind = MinerKind::solo;
  std::size_t group = 0;
  std::size_t index = 0;
};

struct PlantedCoalition {
  std::vector<MinerRef> members;
  double daily_rate = 0.5;  // chance per day per ordered pair of a transfer
};

struct PriceWalk {
  double start_usd = 200.0;
  double daily_drift = 0.0;
  double daily_vol = 0.03;
};

struct SynthConfig {
  std::size_t n_pools = 2;
  std::size_t members_per_pool = 5;
  std::size_t n_solo_miners = 4;
  std::size_t n_days = 60;
  std::size_t blocks_per_day = 50;
  std::size_t payout_period_days = 7;
  std::vector<double> pool_hash_weights{0.5, 0.3};
  double member_hash_weight = 0.008;
  double solo_hash_weight = 0.03;
  std::vector<PlantedCoalition> planted_coalitions;
  PriceWalk price_walk;
  std::size_t noise_tx_per_block = 2;   // transactions not between two miners
  std::size_t n_users = 200;            // non-miner addresses used by noise
  double random_miner_tx_per_day = 0.0; // unplanned miner-to-miner transfers
  double self_tx_per_day = 0.0;         // miner-to-itself transfers
  std::int64_t start_timestamp = 1438214400;  // 2015-07-30 00:00:00 UTC
  std::uint64_t seed = 42;

  // The reference fixture: 2 pools with 5 members each, 4 solo miners and one
  // coalition {pool 1, solo 0, solo 1}; seed 42.
  static SynthConfig fixture() {
    SynthConfig c;
    c.planted_coalitions.push_back(
        {{{MinerKind::pool, 1, 0}, {MinerKind::solo, 0, 0}, {MinerKind::solo, 0, 1}}, 0.5});
    return c;
  }

  // Desk-scale chain: about 100,000 blocks over 1,539 days (51 thirty-day
  // slices) and just over 1,000,000 transactions.
  static SynthConfig desk_scale() {
    SynthConfig c;
    c.n_pools = 20;
    c.members_per_pool = 40;
    c.n_solo_miners = 200;
    c.n_days = 1539;
    c.blocks_per_day = 65;
    c.payout_period_days = 7;
    c.pool_hash_weights.clear();
    for (std::size_t i = 0; i < c.n_pools; ++i) c.pool_hash_weights.push_back(1.0 / static_cast<double>(i + 1));
    c.member_hash_weight = 0.0005;
    c.solo_hash_weight = 0.002;
    c.noise_tx_per_block = 9;
    c.n_users = 5000;
    c.random_miner_tx_per_day = 5.0;
    c.self_tx_per_day = 0.5;
    c.planted_coalitions.push_back({{{MinerKind::pool, 2, 0}, {MinerKind::solo, 0, 0}, {MinerKind::solo, 0, 1}}, 0.2});
    c.planted_coalitions.push_back({{{MinerKind::pool, 0, 0}, {MinerKind::pool, 5, 0}}, 0.1});
    return c;
  }
};

struct GroundTruthMiner {
  Address address;
  MinerKind kind = MinerKind::solo;
  std::size_t group = 0;  // pool index for pools and members, solo index otherwise
  std::uint64_t blocks_mined = 0;
  Role expected_role = Role::isolated;
};

struct PlantedEdge {
  Address from;
  Address to;
  std::string kind;  // "payout" or "coalition"
  std::uint64_t count = 0;
  HierarchyLabel label = HierarchyLabel::tied;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  bool noise_free = true;  // no unplanned miner-to-miner transfers
  std::vector<GroundTruthMiner> miners;          // sorted by address
  std::vector<PlantedEdge> edges;                // sorted by (from, to)
  std::vector<std::vector<Address>> expected_sccs;  // planted groups of size >= 2, sorted
  std::size_t self_transactions = 0;
};

struct SynthChain {
  std::vector<BlockRecord> blocks;
  std::vector<TxRecord> transactions;
  PriceSeries prices;
  GroundTruth truth;
};

inline void validate(const SynthConfig& c) {
  if (c.n_pools + c.n_pools * c.members_per_pool + c.n_solo_miners == 0) {
    throw InvalidInput("synth: configuration has no miners");
  }
  if (c.n_days == 0 || c.blocks_per_day == 0 || c.payout_period_days == 0) {
    throw InvalidInput("synth: n_days, blocks_per_day and payout_period_days must be positive");
  }
  if (c.pool_hash_weights.size() != c.n_pools) throw InvalidInput("synth: need one hash weight per pool");
  for (double w : c.pool_hash_weights) {
    if (!(w > 0.0)) throw InvalidInput("synth: pool hash weights must be positive");
  }
  if ((c.members_per_pool > 0 && c.n_pools > 0 && !(c.member_hash_weight > 0.0)) ||
      (c.n_solo_miners > 0 && !(c.solo_hash_weight > 0.0))) {
    throw InvalidInput("synth: hash weights must be positive");
  }
  if (!(c.price_walk.start_usd > 0.0)) throw InvalidInput("synth: starting price must be positive");
  for (const auto& coalition : c.planted_coalitions) {
    for (const auto& m : coalition.members) {
      const bool ok = (m.kind == MinerKind::pool && m.group < c.n_pools) ||
                      (m.kind == MinerKind::member && m.group < c.n_pools && m.index < c.members_per_pool) ||
                      (m.kind == MinerKind::solo && m.index < c.n_solo_miners);
      if (!ok) throw InvalidInput("synth: coalition refers to a miner that does not exist");
    }
  }
}

inline SynthChain generate_chain(const SynthConfig& config) {
  validate(config);
  Rng rng(derive_seed(config.seed, "synth"));
  const std::size_t n_members = config.n_pools * config.members_per_pool;
  const std::size_t n_miners = config.n_pools + n_members + config.n_solo_miners;
  const std::size_t total_blocks = config.n_days * config.blocks_per_day;
  if (total_blocks < n_miners) throw InvalidInput("synth: fewer blocks than miners");

  // Miner slots: pools, then members pool by pool, then solo miners.
  auto slot_of = [&](const MinerRef& m) -> std::size_t {
    switch (m.kind) {
      case MinerKind::pool: return m.group;
      case MinerKind::member: return config.n_pools + m.group * config.members_per_pool + m.index;
      case MinerKind::solo: break;
    }
    return config.n_pools + n_members + m.index;
  };

  std::set<Address> used;
  auto fresh_address = [&] {
    for (;;) {
      std::array<std::uint8_t, Address::kBytes> bytes{};
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() & 0xFF);
      const Address a(bytes);
      if (used.insert(a).second) return a;
    }
  };

  std::vector<GroundTruthMiner> miners(n_miners);
  std::vector<double> weights(n_miners);
  for (std::size_t p = 0; p < config.n_pools; ++p) {
    miners[p] = {fresh_address(), MinerKind::pool, p, 0, Role::isolated};
    weights[p] = config.pool_hash_weights[p];
    for (std::size_t i = 0; i < config.members_per_pool; ++i) {
      const auto s = slot_of({MinerKind::member, p, i});
      miners[s] = {fresh_address(), MinerKind::member, p, 0, Role::isolated};
      weights[s] = config.member_hash_weight;
    }
  }
  for (std::size_t i = 0; i < config.n_solo_miners; ++i) {
    const auto s = slot_of({MinerKind::solo, 0, i});
    miners[s] = {fresh_address(), MinerKind::solo, i, 0, Role::isolated};
    weights[s] = config.solo_hash_weight;
  }
  std::vector<Address> users(config.n_users);
  for (auto& u : users) u = fresh_address();

  // Every miner mines at least one block; the rest follow the hash weights.
  std::vector<std::size_t> block_miner(total_blocks);
  std::discrete_distribution<std::size_t> pick_miner(weights.begin(), weights.end());
  for (auto& m : block_miner) m = pick_miner(rng);
  {
    std::vector<std::size_t> positions(total_blocks);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    std::shuffle(positions.begin(), positions.end(), rng);
    for (std::size_t s = 0; s < n_miners; ++s) block_miner[positions[s]] = s;
  }

  SynthChain chain;
  chain.blocks.resize(total_blocks);
  for (std::size_t b = 0; b < total_blocks; ++b) {
    const auto offset = static_cast<std::int64_t>((static_cast<unsigned __int128>(b) * 86400u) / config.blocks_per_day);
    chain.blocks[b] = {b, config.start_timestamp + offset, miners[block_miner[b]].address};
    ++miners[block_miner[b]].blocks_mined;
  }

  std::vector<PricePoint> prices;
  {
    std::normal_distribution<double> shock(0.0, 1.0);
    double p = config.price_walk.start_usd;
    const Day first = day_of(config.start_timestamp);
    for (std::size_t d = 0; d <= config.n_days; ++d) {
      prices.push_back({first + static_cast<Day>(d), p});
      p = std::max(0.01, p * std::exp(config.price_walk.daily_drift + config.price_walk.daily_vol * shock(rng)));
    }
  }
  chain.prices = PriceSeries(std::move(prices));

  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::string, std::uint64_t>> planted;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> small_value(1, 5'000'000'000'000'000'000ull);
  std::uint32_t tx_index = 0;
  std::uint64_t current_block = 0;
  auto emit = [&](const Address& from, const Address& to, Wei value) {
    chain.transactions.push_back({current_block, tx_index++, from, to, value});
  };
  auto occurrences = [&](double rate) {
    const double whole = std::floor(rate);
    return static_cast<std::size_t>(whole) + (unit(rng) < rate - whole ? 1 : 0);
  };

  std::vector<std::vector<std::size_t>> coalition_slots;
  for (const auto& c : config.planted_coalitions) {
    std::vector<std::size_t> slots;
    for (const auto& m : c.members) slots.push_back(slot_of(m));
    std::ranges::sort(slots);
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    coalition_slots.push_back(std::move(slots));
  }

  std::vector<std::uint64_t> pool_blocks_in_period(config.n_pools, 0);
  for (std::size_t b = 0; b < total_blocks; ++b) {
    current_block = b;
    tx_index = 0;
    if (block_miner[b] < config.n_pools) ++pool_blocks_in_period[block_miner[b]];

    for (std::size_t i = 0; i < config.noise_tx_per_block; ++i) {
      const Address& from = users[rng() % users.size()];
      const double u = unit(rng);
      if (u < 0.8 || n_miners == 0) {
        emit(from, users[rng() % users.size()], small_value(rng));
      } else if (u < 0.9) {
        emit(from, miners[rng() % n_miners].address, small_value(rng));
      } else {
        emit(miners[rng() % n_miners].address, from, small_value(rng));
      }
    }

    const bool end_of_day = (b + 1) % config.blocks_per_day == 0;
    if (!end_of_day) continue;
    const std::size_t day = b / config.blocks_per_day;
    const bool last_day = day + 1 == config.n_days;

    for (std::size_t c = 0; c < coalition_slots.size(); ++c) {
      const auto& slots = coalition_slots[c];
      for (std::size_t i : slots) {
        for (std::size_t j : slots) {
          if (i == j) continue;
          auto key = std::pair{i, j};
          const bool fire = unit(rng) < config.planted_coalitions[c].daily_rate ||
                            (last_day && (!planted.contains(key) || planted[key].first != "coalition"));
          if (!fire) continue;
          emit(miners[i].address, miners[j].address, small_value(rng));
          auto& entry = planted[key];
          entry.first = "coalition";
          ++entry.second;
        }
      }
    }

    for (std::size_t k = occurrences(config.random_miner_tx_per_day); k > 0 && n_miners > 1; --k) {
      const std::size_t i = rng() % n_miners;
      std::size_t j = rng() % (n_miners - 1);
      if (j >= i) ++j;
      emit(miners[i].address, miners[j].address, small_value(rng));
    }
    for (std::size_t k = occurrences(config.self_tx_per_day); k > 0; --k) {
      const Address& a = miners[rng() % n_miners].address;
      emit(a, a, small_value(rng));
      ++chain.truth.self_transactions;
    }

    const bool end_of_period = (day + 1) % config.payout_period_days == 0 || last_day;
    if (!end_of_period) continue;
    for (std::size_t p = 0; p < config.n_pools; ++p) {
      if (pool_blocks_in_period[p] == 0 || config.members_per_pool == 0) continue;
      const Wei reward = Wei{3} * kWeiPerEth * pool_blocks_in_period[p];
      const Wei share = reward / config.members_per_pool;
      for (std::size_t i = 0; i < config.members_per_pool; ++i) {
        const std::size_t m = slot_of({MinerKind::member, p, i});
        emit(miners[p].address, miners[m].address, share);
        auto& entry = planted[{p, m}];
        if (entry.first.empty()) entry.first = "payout";
        ++entry.second;
      }
      pool_blocks_in_period[p] = 0;
    }
  }

  // Ground truth, from the generator's own bookkeeping.
  GroundTruth& truth = chain.truth;
  truth.seed = config.seed;
  truth.noise_free = config.random_miner_tx_per_day == 0.0;
  std::vector<std::size_t> in_deg(n_miners, 0);
  std::vector<std::size_t> out_deg(n_miners, 0);
  for (const auto& [key, entry] : planted) {
    const auto [i, j] = key;
    ++out_deg[i];
    ++in_deg[j];
    const auto bi = miners[i].blocks_mined;
    const auto bj = miners[j].blocks_mined;
    const HierarchyLabel label = bj > bi ? HierarchyLabel::against : bj == bi ? HierarchyLabel::tied : HierarchyLabel::with;
    truth.edges.push_back({miners[i].address, miners[j].address, entry.first, entry.second, label});
  }
  for (std::size_t s = 0; s < n_miners; ++s) {
    miners[s].expected_role = role_of(in_deg[s], out_deg[s]);
  }
  truth.miners = miners;
  std::ranges::sort(truth.miners, {}, &GroundTruthMiner::address);
  std::ranges::sort(truth.edges, [](const PlantedEdge& a, const PlantedEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });

  // Overlapping coalitions merge into one expected component.
  std::vector<std::set<std::size_t>> groups;
  for (const auto& slots : coalition_slots) {
    if (slots.size() < 2) continue;
    std::set<std::size_t> merged(slots.begin(), slots.end());
    std::vector<std::set<std::size_t>> rest;
    for (auto& g : groups) {
      const bool overlaps = std::ranges::any_of(g, [&](std::size_t s) { return merged.contains(s); });
      if (overlaps) {
        merged.insert(g.begin(), g.end());
      } else {
        rest.push_back(std::move(g));
      }
    }
    rest.push_back(std::move(merged));
    groups = std::move(rest);
  }
  for (const auto& g : groups) {
    std::vector<Address> addrs;
    for (std::size_t s : g) addrs.push_back(miners[s].address);
    std::ranges::sort(addrs);
    truth.expected_sccs.push_back(std::move(addrs));
  }
  std::ranges::sort(truth.expected_sccs);
  return chain;
}

inline std::string_view label_name(HierarchyLabel l) noexcept {
  switch (l) {
    case HierarchyLabel::against: return "against";
    case HierarchyLabel::with: return "with";
    case HierarchyLabel::tied: return "tied";
  }
  return "?";
}

// ground_truth.json, schema_version 1:
//   {schema_version, seed, noise_free, self_transactions,
//    miners: [{address, kind, group, blocks_mined, expected_role}],
//    edges: [{from, to, kind, count, label}],
//    expected_sccs: [[address, ...]]}
inline nlohmann::ordered_json ground_truth_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = truth.seed;
  j["noise_free"] = truth.noise_free;
  j["self_transactions"] = truth.self_transactions;
  auto& miners = j["miners"] = nlohmann::ordered_json::array();
  for (const auto& m : truth.miners) {
    miners.push_back({{"address", m.address.str()},
                      {"kind", kind_name(m.kind)},
                      {"group", m.group},
                      {"blocks_mined", m.blocks_mined},
                      {"expected_role", role_name(m.expected_role)}});
  }
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : truth.edges) {
    edges.push_back({{"from", e.from.str()},
                     {"to", e.to.str()},
                     {"kind", e.kind},
                     {"count", e.count},
                     {"label", label_name(e.label)}});
  }
  auto& sccs = j["expected_sccs"] = nlohmann::ordered_json::array();
  for (const auto& group : truth.expected_sccs) {
    auto& arr = sccs.emplace_back(nlohmann::ordered_json::array());
    for (const auto& a : group) arr.push_back(a.str());
  }
  return j;
}

// Writes blocks.csv, transactions.csv, prices.csv and ground_truth.json.
inline void write_chain(const SynthChain& chain, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    AtomicFile f(dir / "blocks.csv");
    write_blocks(f.stream(), chain.blocks);
    f.commit();
  }
  {
    AtomicFile f(dir / "transactions.csv");
    write_transaction_header(f.stream());
    for (const auto& tx : chain.transactions) write_transaction(f.stream(), tx);
    f.commit();
  }
  {
    AtomicFile f(dir / "prices.csv");
    write_prices(f.stream(), chain.prices);
    f.commit();
  }
  {
    AtomicFile f(dir / "ground_truth.json");
    f.stream() << ground_truth_json(chain.truth).dump(2) << '\n';
    f.commit();
  }
}

}  // namespace minergraph
