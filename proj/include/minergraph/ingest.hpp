#pragma once

// Parsing of block, transaction and price files, miner-set extraction and
// the miner-to-miner transaction filter.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minergraph/address.hpp"
#include "minergraph/csv.hpp"
#include "minergraph/error.hpp"
#include "minergraph/log.hpp"
#include "minergraph/numeric.hpp"

namespace minergraph {

// Token amounts in wei (1 ETH = 10^18 wei). 128 bits covers total supply.
using Wei = unsigned __int128;

inline constexpr Wei kWeiPerEth = 1'000'000'000'000'000'000ull;

inline std::optional<Wei> parse_wei(std::string_view text) {
  if (text.empty() || text.size() > 39) return std::nullopt;
  Wei value = 0;
  constexpr Wei kMax = ~Wei{0};
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    const auto digit = static_cast<unsigned>(c - '0');
    if (value > (kMax - digit) / 10) return std::nullopt;
    value = value * 10 + digit;
  }
  return value;
}

inline std::string wei_to_string(Wei value) {
  if (value == 0) return "0";
  std::string out;
  while (value > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Exact integer part plus rounded fractional part; monotone in `value`.
inline double wei_to_eth(Wei value) {
  return static_cast<double>(value / kWeiPerEth) +
         static_cast<double>(static_cast<std::uint64_t>(value % kWeiPerEth)) / 1e18;
}

// Calendar day as days since 1970-01-01 (UTC).
using Day = std::int64_t;

inline Day day_of(std::int64_t unix_seconds) {
  return unix_seconds >= 0 ? unix_seconds / 86400 : -((-unix_seconds + 86399) / 86400);
}

inline std::optional<Day> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return res.ec == std::errc{} && res.ptr == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

inline std::string format_date(Day day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

struct BlockRecord {
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;
  Address miner;

  friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

struct TxRecord {
  std::uint64_t block_number = 0;
  std::uint32_t tx_index = 0;
  Address from;
  Address to;
  Wei value_wei = 0;

  friend bool operator==(const TxRecord&, const TxRecord&) = default;
};

struct PricePoint {
  Day date = 0;
  double usd_per_eth = 0.0;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct MinerTx {
  std::uint64_t block_number = 0;
  std::uint32_t tx_index = 0;
  Address from;
  Address to;
  Wei value_wei = 0;
  double value_usd = 0.0;

  friend bool operator==(const MinerTx&, const MinerTx&) = default;
};

inline Address parse_address(const CsvReader& csv, std::size_t column, std::string_view name) {
  const auto text = csv.field(column);
  auto addr = Address::parse(text);
  if (!addr) throw ParseError(csv.line_number(), "invalid " + std::string(name) + " '" + std::string(text) + "'");
  return *addr;
}

// Blocks sorted by number. Duplicate numbers are an error; timestamps that
// decrease along block order are reported through `warnings` (and the log).
inline std::vector<BlockRecord> parse_blocks(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  CsvReader csv(in);
  csv.expect_header({"block_number", "timestamp", "miner"});
  std::vector<BlockRecord> blocks;
  std::vector<std::size_t> lines;
  while (csv.next()) {
    csv.require_columns(3);
    BlockRecord b;
    b.block_number = csv.integer<std::uint64_t>(0, "block_number");
    b.timestamp = csv.integer<std::int64_t>(1, "timestamp");
    b.miner = parse_address(csv, 2, "miner");
    blocks.push_back(b);
    lines.push_back(csv.line_number());
  }
  std::vector<std::size_t> order(blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::stable_sort(order, {}, [&](std::size_t i) { return blocks[i].block_number; });
  std::vector<BlockRecord> sorted;
  sorted.reserve(blocks.size());
  for (std::size_t n = 0; n < order.size(); ++n) {
    const auto& b = blocks[order[n]];
    if (n > 0 && sorted.back().block_number == b.block_number) {
      throw ParseError(lines[order[n]], "duplicate block_number " + std::to_string(b.block_number));
    }
    if (n > 0 && b.timestamp < sorted.back().timestamp) {
      const auto msg = "line " + std::to_string(lines[order[n]]) + ": timestamp of block " +
                       std::to_string(b.block_number) + " precedes its predecessor";
      log::warn(msg);
      if (warnings != nullptr) warnings->push_back(msg);
    }
    sorted.push_back(b);
  }
  return sorted;
}

inline void write_blocks(std::ostream& out, std::span<const BlockRecord> blocks) {
  out << "block_number,timestamp,miner\n";
  for (const auto& b : blocks) out << b.block_number << ',' << b.timestamp << ',' << b.miner << '\n';
}

// Streams transactions through `sink(const TxRecord&, std::size_t line)`.
// Never materializes the file.
template <typename Sink>
void for_each_transaction(std::istream& in, Sink&& sink) {
  CsvReader csv(in);
  csv.expect_header({"block_number", "tx_index", "from_address", "to_address", "value_wei"});
  while (csv.next()) {
    csv.require_columns(5);
    TxRecord tx;
    tx.block_number = csv.integer<std::uint64_t>(0, "block_number");
    tx.tx_index = csv.integer<std::uint32_t>(1, "tx_index");
    tx.from = parse_address(csv, 2, "from_address");
    tx.to = parse_address(csv, 3, "to_address");
    const auto value = parse_wei(csv.field(4));
    if (!value) throw ParseError(csv.line_number(), "invalid value_wei '" + std::string(csv.field(4)) + "'");
    tx.value_wei = *value;
    sink(tx, csv.line_number());
  }
}

inline std::vector<TxRecord> parse_transactions(std::istream& in) {
  std::vector<TxRecord> txs;
  for_each_transaction(in, [&](const TxRecord& tx, std::size_t) { txs.push_back(tx); });
  return txs;
}

inline void write_transaction_header(std::ostream& out) {
  out << "block_number,tx_index,from_address,to_address,value_wei\n";
}

inline void write_transaction(std::ostream& out, const TxRecord& tx) {
  out << tx.block_number << ',' << tx.tx_index << ',' << tx.from << ',' << tx.to << ','
      << wei_to_string(tx.value_wei) << '\n';
}

// Daily ETH/USD series, sorted by date, one entry per date.
class PriceSeries {
 public:
  PriceSeries() = default;

  explicit PriceSeries(std::vector<PricePoint> points) : points_(std::move(points)) {
    std::ranges::sort(points_, {}, &PricePoint::date);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!(points_[i].usd_per_eth > 0.0)) {
        throw InvalidInput("non-positive price on " + format_date(points_[i].date));
      }
      if (i > 0 && points_[i].date == points_[i - 1].date) {
        throw InvalidInput("duplicate price date " + format_date(points_[i].date));
      }
    }
  }

  bool empty() const noexcept { return points_.empty(); }
  std::span<const PricePoint> points() const noexcept { return points_; }

  // Rate for `day`; falls back to the nearest earlier date, then to the
  // earliest date when nothing earlier exists.
  double rate_on(Day day) const {
    if (points_.empty()) throw InvalidInput("price series is empty");
    auto it = std::ranges::upper_bound(points_, day, {}, &PricePoint::date);
    if (it == points_.begin()) return points_.front().usd_per_eth;
    return std::prev(it)->usd_per_eth;
  }

 private:
  std::vector<PricePoint> points_;
};

inline PriceSeries parse_prices(std::istream& in) {
  CsvReader csv(in);
  csv.expect_header({"date", "usd_per_eth"});
  std::vector<PricePoint> points;
  std::vector<std::size_t> seen_lines;
  while (csv.next()) {
    csv.require_columns(2);
    const auto date = parse_date(csv.field(0));
    if (!date) throw ParseError(csv.line_number(), "invalid date '" + std::string(csv.field(0)) + "'");
    const double rate = csv.real(1, "usd_per_eth");
    if (!(rate > 0.0)) throw ParseError(csv.line_number(), "usd_per_eth must be positive");
    points.push_back({*date, rate});
    seen_lines.push_back(csv.line_number());
  }
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::stable_sort(order, {}, [&](std::size_t i) { return points[i].date; });
  for (std::size_t n = 1; n < order.size(); ++n) {
    if (points[order[n]].date == points[order[n - 1]].date) {
      throw ParseError(seen_lines[order[n]], "duplicate date " + format_date(points[order[n]].date));
    }
  }
  return PriceSeries(std::move(points));
}

inline void write_prices(std::ostream& out, const PriceSeries& prices) {
  out << "date,usd_per_eth\n";
  for (const auto& p : prices.points()) out << format_date(p.date) << ',' << format_double(p.usd_per_eth) << '\n';
}

// Distinct miners of blocks numbered <= upto_block, sorted.
inline std::vector<Address> miner_set(std::span<const BlockRecord> blocks, std::uint64_t upto_block) {
  std::vector<Address> miners;
  for (const auto& b : blocks) {
    if (b.block_number <= upto_block) miners.push_back(b.miner);
  }
  std::ranges::sort(miners);
  const auto dup = std::ranges::unique(miners);
  miners.erase(dup.begin(), dup.end());
  return miners;
}

inline bool contains(std::span<const Address> sorted_set, const Address& a) {
  return std::ranges::binary_search(sorted_set, a);
}

// Lookup of blocks (sorted by number) by block number.
inline const BlockRecord* find_block(std::span<const BlockRecord> blocks, std::uint64_t number) {
  if (!blocks.empty()) {
    const auto first = blocks.front().block_number;
    if (number >= first && number - first < blocks.size() && blocks[number - first].block_number == number) {
      return &blocks[number - first];
    }
  }
  auto it = std::ranges::lower_bound(blocks, number, {}, &BlockRecord::block_number);
  if (it == blocks.end() || it->block_number != number) return nullptr;
  return &*it;
}

inline double usd_value(const TxRecord& tx, const BlockRecord& block, const PriceSeries& prices) {
  return wei_to_eth(tx.value_wei) * prices.rate_on(day_of(block.timestamp));
}

struct FilterTally {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t self = 0;

  friend bool operator==(const FilterTally&, const FilterTally&) = default;
};

// Incremental form of filter_miner_tx for streamed inputs.
class MinerTxFilter {
 public:
  MinerTxFilter(std::span<const Address> miners, const PriceSeries& prices, std::span<const BlockRecord> blocks)
      : miners_(miners), prices_(prices), blocks_(blocks) {
    if (prices.empty()) throw InvalidInput("price series is empty");
  }

  void add(const TxRecord& tx) {
    const BlockRecord* block = find_block(blocks_, tx.block_number);
    if (block == nullptr) throw InvalidInput("transaction references unknown block " + std::to_string(tx.block_number));
    ++tally_.input;
    if (!contains(miners_, tx.from) || !contains(miners_, tx.to)) {
      ++tally_.dropped;
      return;
    }
    if (tx.from == tx.to) {
      ++tally_.self;
      return;
    }
    ++tally_.kept;
    kept_.push_back({tx.block_number, tx.tx_index, tx.from, tx.to, tx.value_wei, usd_value(tx, *block, prices_)});
  }

  const FilterTally& tally() const noexcept { return tally_; }

  // Kept transactions sorted by (block_number, tx_index).
  std::vector<MinerTx> take() {
    std::ranges::sort(kept_, [](const MinerTx& a, const MinerTx& b) {
      return std::tie(a.block_number, a.tx_index, a.from, a.to) < std::tie(b.block_number, b.tx_index, b.from, b.to);
    });
    return std::move(kept_);
  }

 private:
  std::span<const Address> miners_;
  const PriceSeries& prices_;
  std::span<const BlockRecord> blocks_;
  FilterTally tally_;
  std::vector<MinerTx> kept_;
};

struct FilterResult {
  std::vector<MinerTx> transactions;
  FilterTally tally;
};

// Keeps transactions between two distinct miners; self-transfers between a
// miner and itself are tallied separately.
inline FilterResult filter_miner_tx(std::span<const TxRecord> txs, std::span<const Address> miners,
                                    const PriceSeries& prices, std::span<const BlockRecord> blocks) {
  MinerTxFilter filter(miners, prices, blocks);
  for (const auto& tx : txs) filter.add(tx);
  FilterResult out;
  out.tally = filter.tally();
  out.transactions = filter.take();
  return out;
}

// Streams a transactions file through the filter. Errors carry the line.
inline FilterResult filter_miner_tx(std::istream& transactions, std::span<const Address> miners,
                                    const PriceSeries& prices, std::span<const BlockRecord> blocks) {
  MinerTxFilter filter(miners, prices, blocks);
  for_each_transaction(transactions, [&](const TxRecord& tx, std::size_t line) {
    try {
      filter.add(tx);
    } catch (const InvalidInput& e) {
      throw ParseError(line, e.what());
    }
  });
  FilterResult out;
  out.tally = filter.tally();
  out.transactions = filter.take();
  return out;
}

inline TxRecord to_tx_record(const MinerTx& tx) {
  return {tx.block_number, tx.tx_index, tx.from, tx.to, tx.value_wei};
}

}  // namespace minergraph
