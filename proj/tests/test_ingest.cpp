#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <zlib.h>

#include "minergraph/ingest.hpp"
#include "support.hpp"

using namespace minergraph;
using testing_support::addr;
using testing_support::hex;

namespace {

std::int64_t ts(const char* date, std::int64_t seconds_into_day = 3600) {
  return *parse_date(date) * 86400 + seconds_into_day;
}

PriceSeries prices_of(std::initializer_list<std::pair<const char*, double>> rows) {
  std::vector<PricePoint> points;
  for (const auto& [d, p] : rows) points.push_back({*parse_date(d), p});
  return PriceSeries(std::move(points));
}

}  // namespace

TEST(Address, ParsesMixedCaseAndNormalizes) {
  const auto a = Address::parse("0xAbCdEf0000000000000000000000000000000001");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->str(), "0xabcdef0000000000000000000000000000000001");
  EXPECT_EQ(Address::parse(a->str()), a);
  EXPECT_FALSE(Address::parse("0x123"));
  EXPECT_FALSE(Address::parse("0xzz00000000000000000000000000000000000000"));
}

TEST(Address, RoundTripsRandomAddresses) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    std::string text = "0x";
    for (int c = 0; c < 40; ++c) text += "0123456789abcdefABCDEF"[rng() % 22];
    const auto a = Address::parse(text);
    ASSERT_TRUE(a);
    EXPECT_EQ(Address::parse(a->str()), a);
    std::string lower = text;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    EXPECT_EQ(a->str(), lower);
  }
}

TEST(Address, OrderMatchesHexText) {
  std::mt19937_64 rng(11);
  std::vector<Address> xs;
  for (int i = 0; i < 200; ++i) {
    std::string text = "0x";
    for (int c = 0; c < 40; ++c) text += "0123456789abcdef"[rng() % 16];
    xs.push_back(*Address::parse(text));
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    EXPECT_EQ(xs[i - 1] < xs[i], xs[i - 1].str() < xs[i].str());
  }
}

TEST(ParseBlocks, NormalizesRow) {
  std::istringstream in("block_number,timestamp,miner\n5,1600000000,0xAB000000000000000000000000000000000000EF\n");
  const auto blocks = parse_blocks(in);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].block_number, 5u);
  EXPECT_EQ(blocks[0].timestamp, 1600000000);
  EXPECT_EQ(blocks[0].miner.str(), "0xab000000000000000000000000000000000000ef");
}

TEST(ParseBlocks, HeaderOnlyIsEmpty) {
  std::istringstream in("block_number,timestamp,miner\n");
  EXPECT_TRUE(parse_blocks(in).empty());
}

TEST(ParseBlocks, SortsByBlockNumber) {
  std::istringstream in("block_number,timestamp,miner\n2,30," + hex(0) + "\n0,10," + hex(1) + "\n1,20," + hex(2) + "\n");
  const auto blocks = parse_blocks(in);
  ASSERT_EQ(blocks.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(blocks[i].block_number, i);
  EXPECT_EQ(blocks[0].miner, addr(1));
}

TEST(ParseBlocks, ShuffledInputSortsLikeOracle) {
  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> numbers(300);
  for (std::size_t i = 0; i < numbers.size(); ++i) numbers[i] = i * 3 + 7;
  std::ranges::shuffle(numbers, rng);
  std::string text = "block_number,timestamp,miner\n";
  for (auto n : numbers) text += std::to_string(n) + "," + std::to_string(n * 13) + "," + hex(n % 5) + "\n";
  std::istringstream in(text);
  const auto blocks = parse_blocks(in);
  std::ranges::sort(numbers);
  ASSERT_EQ(blocks.size(), numbers.size());
  for (std::size_t i = 0; i < numbers.size(); ++i) EXPECT_EQ(blocks[i].block_number, numbers[i]);
}

TEST(ParseBlocks, MalformedRowReportsLine) {
  std::istringstream in("block_number,timestamp,miner\n0,10," + hex(0) + "\n1,abc," + hex(0) + "\n");
  try {
    parse_blocks(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseBlocks, BadAddressAndColumnCountAreErrors) {
  std::istringstream bad_addr("block_number,timestamp,miner\n0,10,0x12\n");
  EXPECT_THROW(parse_blocks(bad_addr), ParseError);
  std::istringstream short_row("block_number,timestamp,miner\n0,10\n");
  EXPECT_THROW(parse_blocks(short_row), ParseError);
  std::istringstream bad_header("number,timestamp,miner\n");
  EXPECT_THROW(parse_blocks(bad_header), ParseError);
}

TEST(ParseBlocks, DuplicateNumberIsError) {
  std::istringstream in("block_number,timestamp,miner\n0,10," + hex(0) + "\n0,11," + hex(1) + "\n");
  try {
    parse_blocks(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseBlocks, NonMonotoneTimestampWarns) {
  std::istringstream in("block_number,timestamp,miner\n0,100," + hex(0) + "\n1,50," + hex(1) + "\n2,200," + hex(0) + "\n");
  std::vector<std::string> warnings;
  const auto blocks = parse_blocks(in, &warnings);
  EXPECT_EQ(blocks.size(), 3u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ParseBlocks, ToleratesCrlfAndBlankLines) {
  std::istringstream in("block_number,timestamp,miner\r\n0,10," + hex(0) + "\r\n\r\n1,11," + hex(1) + "\r\n");
  EXPECT_EQ(parse_blocks(in).size(), 2u);
}

TEST(ParseBlocks, WriteThenParseRoundTrips) {
  std::vector<BlockRecord> blocks;
  for (std::uint64_t i = 0; i < 50; ++i) blocks.push_back({i, static_cast<std::int64_t>(1000 + i * 15), addr(i % 7)});
  std::ostringstream out;
  write_blocks(out, blocks);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_blocks(in), blocks);
}

TEST(MinerSet, Dedups) {
  const std::vector<BlockRecord> blocks{{0, 0, addr(0)}, {1, 1, addr(1)}, {2, 2, addr(0)}};
  EXPECT_EQ(miner_set(blocks, 2), (std::vector<Address>{addr(0), addr(1)}));
}

TEST(MinerSet, UptoBeforeFirstBlockIsEmpty) {
  const std::vector<BlockRecord> blocks{{10, 0, addr(0)}, {11, 1, addr(1)}};
  EXPECT_TRUE(miner_set(blocks, 9).empty());
}

TEST(MinerSet, MatchesSetOracle) {
  std::mt19937_64 rng(9);
  std::vector<BlockRecord> blocks;
  std::set<Address> oracle;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Address a = addr(static_cast<std::uint32_t>(rng() % 7));
    blocks.push_back({i, static_cast<std::int64_t>(i), a});
    oracle.insert(a);
  }
  const auto miners = miner_set(blocks, 99);
  EXPECT_EQ(miners, std::vector<Address>(oracle.begin(), oracle.end()));
  EXPECT_EQ(miners.size(), 7u);
}

TEST(UsdValue, Examples) {
  const BlockRecord block{1, ts("2016-03-02"), addr(0)};
  const auto prices = prices_of({{"2016-03-01", 250.0}, {"2016-03-03", 100.0}});
  const auto on_day = prices_of({{"2016-03-02", 100.0}});
  EXPECT_DOUBLE_EQ(usd_value({1, 0, addr(0), addr(1), Wei{2} * kWeiPerEth}, block, on_day), 200.0);
  EXPECT_EQ(usd_value({1, 0, addr(0), addr(1), 0}, block, on_day), 0.0);
  EXPECT_DOUBLE_EQ(usd_value({1, 0, addr(0), addr(1), kWeiPerEth}, block, prices), 250.0);
}

TEST(UsdValue, BeforeFirstPriceUsesEarliest) {
  const BlockRecord block{1, ts("2015-01-01"), addr(0)};
  const auto prices = prices_of({{"2016-03-01", 250.0}, {"2016-03-03", 100.0}});
  EXPECT_DOUBLE_EQ(usd_value({1, 0, addr(0), addr(1), kWeiPerEth}, block, prices), 250.0);
}

TEST(UsdValue, MonotoneInWei) {
  std::mt19937_64 rng(17);
  const BlockRecord block{1, ts("2016-03-02"), addr(0)};
  const auto prices = prices_of({{"2016-03-02", 12.345}});
  std::vector<Wei> values;
  for (int i = 0; i < 2000; ++i) {
    Wei v = static_cast<Wei>(rng()) * (rng() % 1000);
    values.push_back(v);
  }
  values.push_back(kWeiPerEth - 1);
  values.push_back(kWeiPerEth);
  values.push_back(kWeiPerEth + 1);
  std::ranges::sort(values);
  double previous = -1.0;
  for (Wei v : values) {
    const double usd = usd_value({1, 0, addr(0), addr(1), v}, block, prices);
    EXPECT_GE(usd, previous);
    previous = usd;
  }
}

TEST(Wei, ParsesLargeValuesExactly) {
  const auto v = parse_wei("123456789012345678901234567890");
  ASSERT_TRUE(v);
  EXPECT_EQ(wei_to_string(*v), "123456789012345678901234567890");
  EXPECT_FALSE(parse_wei("-1"));
  EXPECT_FALSE(parse_wei("1.5"));
  EXPECT_FALSE(parse_wei(""));
  EXPECT_DOUBLE_EQ(wei_to_eth(Wei{3} * kWeiPerEth / 2), 1.5);
}

TEST(Prices, ParseRejectsDuplicatesAndNonPositive) {
  std::istringstream dup("date,usd_per_eth\n2016-01-01,1\n2016-01-02,2\n2016-01-01,3\n");
  try {
    parse_prices(dup);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  std::istringstream zero("date,usd_per_eth\n2016-01-01,0\n");
  EXPECT_THROW(parse_prices(zero), ParseError);
  std::istringstream bad_date("date,usd_per_eth\n2016-13-01,5\n");
  EXPECT_THROW(parse_prices(bad_date), ParseError);
}

TEST(Prices, WriteThenParseRoundTrips) {
  const auto prices = prices_of({{"2016-01-01", 0.93}, {"2016-01-02", 1.0 / 3.0}, {"2020-02-29", 223.5}});
  std::ostringstream out;
  write_prices(out, prices);
  std::istringstream in(out.str());
  const auto back = parse_prices(in);
  ASSERT_EQ(back.points().size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.points()[i], prices.points()[i]);
}

class FilterTest : public ::testing::Test {
 protected:
  std::vector<BlockRecord> blocks{{0, ts("2016-01-01"), addr(0)}, {1, ts("2016-01-01", 7200), addr(1)}};
  PriceSeries prices = prices_of({{"2016-01-01", 10.0}});
};

TEST_F(FilterTest, KeepsMinerPairsAndTalliesSelf) {
  const Address a = addr(0), b = addr(1), x = addr(50);
  const std::vector<TxRecord> txs{{1, 0, a, b, kWeiPerEth}, {1, 1, a, x, kWeiPerEth}, {1, 2, b, b, kWeiPerEth}};
  const std::vector<Address> miners{a, b};
  const auto r = filter_miner_tx(txs, miners, prices, blocks);
  ASSERT_EQ(r.transactions.size(), 1u);
  EXPECT_EQ(r.transactions[0].from, a);
  EXPECT_EQ(r.transactions[0].to, b);
  EXPECT_DOUBLE_EQ(r.transactions[0].value_usd, 10.0);
  EXPECT_EQ(r.tally.self, 1u);
  EXPECT_EQ(r.tally.dropped, 1u);
  EXPECT_EQ(r.tally.input, 3u);
}

TEST_F(FilterTest, NoMinersKeepsNothing) {
  const std::vector<TxRecord> txs{{1, 0, addr(0), addr(1), 5}};
  const auto r = filter_miner_tx(txs, std::vector<Address>{}, prices, blocks);
  EXPECT_TRUE(r.transactions.empty());
}

TEST_F(FilterTest, UnknownBlockIsError) {
  const std::vector<TxRecord> txs{{7, 0, addr(0), addr(1), 5}};
  EXPECT_THROW(filter_miner_tx(txs, std::vector<Address>{addr(0), addr(1)}, prices, blocks), InvalidInput);
  std::istringstream in("block_number,tx_index,from_address,to_address,value_wei\n7,0," + hex(0) + "," + hex(1) + ",5\n");
  try {
    filter_miner_tx(in, std::vector<Address>{addr(0), addr(1)}, prices, blocks);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(FilterTest, ZeroValueTransactionsAreKept) {
  const std::vector<TxRecord> txs{{1, 0, addr(0), addr(1), 0}};
  const auto r = filter_miner_tx(txs, std::vector<Address>{addr(0), addr(1)}, prices, blocks);
  ASSERT_EQ(r.transactions.size(), 1u);
  EXPECT_EQ(r.transactions[0].value_usd, 0.0);
}

TEST_F(FilterTest, RandomInputsPartitionAndAreIdempotent) {
  std::mt19937_64 rng(23);
  const std::vector<Address> miners{addr(0), addr(1), addr(2), addr(3)};
  for (int round = 0; round < 50; ++round) {
    std::vector<TxRecord> txs;
    const std::size_t n = rng() % 200;
    for (std::uint32_t i = 0; i < n; ++i) {
      txs.push_back({rng() % 2, i, addr(static_cast<std::uint32_t>(rng() % 8)), addr(static_cast<std::uint32_t>(rng() % 8)),
                     static_cast<Wei>(rng() % 1000000)});
    }
    const auto r = filter_miner_tx(txs, miners, prices, blocks);
    EXPECT_EQ(r.tally.kept + r.tally.dropped + r.tally.self, txs.size());
    EXPECT_EQ(r.tally.kept, r.transactions.size());

    std::vector<TxRecord> again;
    for (const auto& t : r.transactions) again.push_back(to_tx_record(t));
    const auto r2 = filter_miner_tx(again, miners, prices, blocks);
    EXPECT_EQ(r2.transactions, r.transactions);
    EXPECT_EQ(r2.tally.dropped + r2.tally.self, 0u);
  }
}

TEST_F(FilterTest, StreamAndSpanAgree) {
  std::vector<TxRecord> txs{{1, 1, addr(1), addr(0), 77}, {0, 0, addr(0), addr(1), 5}, {1, 0, addr(2), addr(0), 9}};
  std::ostringstream out;
  write_transaction_header(out);
  for (const auto& t : txs) write_transaction(out, t);
  std::istringstream in(out.str());
  const std::vector<Address> miners{addr(0), addr(1)};
  const auto from_stream = filter_miner_tx(in, miners, prices, blocks);
  const auto from_span = filter_miner_tx(txs, miners, prices, blocks);
  EXPECT_EQ(from_stream.transactions, from_span.transactions);
  ASSERT_EQ(from_span.transactions.size(), 2u);
  EXPECT_EQ(from_span.transactions[0].block_number, 0u);
}

TEST(InputFile, ReadsGzipByExtension) {
  const auto dir = testing_support::temp_dir("gz");
  const std::string text = "block_number,timestamp,miner\n0,10," + hex(0) + "\n1,20," + hex(1) + "\n";
  const auto path = dir / "blocks.csv.gz";
  gzFile gz = gzopen(path.c_str(), "wb");
  ASSERT_NE(gz, nullptr);
  gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
  gzclose(gz);
  InputFile f(path);
  const auto blocks = parse_blocks(f.stream());
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[1].miner, addr(1));
  std::filesystem::remove_all(dir);
}

TEST(InputFile, MissingFileIsFileError) {
  try {
    InputFile f("/nonexistent/blocks.csv");
    FAIL() << "expected FileError";
  } catch (const FileError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/blocks.csv");
  }
}
