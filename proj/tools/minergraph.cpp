// minergraph: command-line front end.
//
//   minergraph ingest   -b blocks.csv -t transactions.csv -p prices.csv -o out/
//   minergraph analyze  -b ... -t ... -p ... -o out/ [--slice all|last|k] [--seed N]
//   minergraph synth    [--preset fixture|desk] [--seed N] -o fixture/
//   minergraph export   --slice-dir out/slices/k51 --format graphml|dot [-o file]
//   minergraph verify   --slice-dir out/slices/k51
//
// Exit codes: 0 success, 1 analysis or verification failure, 2 unreadable
// input, 64 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "minergraph/minergraph.hpp"

namespace {

namespace fs = std::filesystem;
using namespace minergraph;

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitUsage = 64;

const std::set<std::string> kSubcommands{"ingest", "analyze", "synth", "export", "verify"};

void add_input_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("-b,--blocks", cfg.blocks, "blocks.csv[.gz]")->required();
  cmd->add_option("-t,--transactions", cfg.transactions, "transactions.csv[.gz]")->required();
  cmd->add_option("-p,--prices", cfg.prices, "prices.csv[.gz]")->required();
  cmd->add_option("-o,--out", cfg.out, "output directory")->required();
}

void mark_partial(const fs::path& out, const std::string& message) {
  if (out.empty()) return;
  std::error_code ec;
  fs::create_directories(out, ec);
  std::ofstream marker(out / ".partial");
  marker << message << '\n';
}

void clear_partial(const fs::path& out) {
  std::error_code ec;
  fs::remove(out / ".partial", ec);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2 || !kSubcommands.contains(argv[1])) {
    const bool help = argc >= 2 && (std::string(argv[1]) == "-h" || std::string(argv[1]) == "--help");
    (help ? std::cout : std::cerr)
        << "usage: minergraph <ingest|analyze|synth|export|verify> [options]\n"
           "  ingest   validate and normalize blocks/transactions/prices\n"
           "  analyze  run the full analysis pipeline\n"
           "  synth    generate a synthetic chain with ground truth\n"
           "  export   write GraphML or DOT from a slice directory\n"
           "  verify   re-check the sets emitted for a slice\n"
           "run 'minergraph <command> --help' for options\n";
    if (argc >= 2 && !help) std::cerr << "unknown subcommand '" << argv[1] << "'\n";
    return help ? 0 : kExitUsage;
  }

  CLI::App app{"Miner transaction network analysis"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> formats;

  auto* ingest = app.add_subcommand("ingest", "validate and normalize inputs");
  add_input_flags(ingest, cfg);

  auto* analyze = app.add_subcommand("analyze", "run the full analysis pipeline");
  add_input_flags(analyze, cfg);
  analyze->add_option("--window-days", cfg.window_days, "slice window in days")->capture_default_str();
  analyze->add_option("--slice", cfg.slice, "all | last | k")->capture_default_str();
  analyze->add_option("--restarts", cfg.restarts, "greedy restarts")->capture_default_str();
  analyze->add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  analyze->add_option("--theta", cfg.theta, "hash threshold for the threshold set")->capture_default_str();
  analyze->add_option("--format", formats, "csv,json,graphml,dot")->delimiter(',');
  analyze->add_option("--workers", cfg.workers, "slices analysed in parallel")->capture_default_str();

  std::string preset = "fixture";
  fs::path synth_out;
  std::uint64_t synth_seed = 42;
  auto* synth = app.add_subcommand("synth", "generate a synthetic chain");
  synth->add_option("--preset", preset, "fixture | desk")->check(CLI::IsMember({"fixture", "desk"}))->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  std::size_t days = 0;
  std::size_t blocks_per_day = 0;
  synth->add_option("--days", days, "override number of days");
  synth->add_option("--blocks-per-day", blocks_per_day, "override blocks per day");

  fs::path slice_dir_path;
  std::string export_format = "graphml";
  fs::path export_out;
  auto* exp = app.add_subcommand("export", "GraphML/DOT from a slice directory");
  exp->add_option("--slice-dir", slice_dir_path, "directory holding nodes.csv and edges.csv")->required();
  exp->add_option("--format", export_format, "graphml | dot")->check(CLI::IsMember({"graphml", "dot"}))->capture_default_str();
  exp->add_option("-o,--out", export_out, "output file (default: <slice-dir>/network.<ext>)");

  auto* verify = app.add_subcommand("verify", "re-check emitted sets of a slice");
  verify->add_option("--slice-dir", slice_dir_path, "slice directory written by analyze")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) {
      try {
        const auto summary = run_ingest(cfg);
        std::cout << summary.dump(2) << '\n';
        clear_partial(cfg.out);
      } catch (...) {
        mark_partial(cfg.out, "ingest failed");
        throw;
      }
      return 0;
    }
    if (*analyze) {
      if (!formats.empty()) cfg.formats = std::set<std::string>(formats.begin(), formats.end());
      try {
        const auto result = run_pipeline(cfg);
        clear_partial(cfg.out);
        std::cout << "analysed " << result.analyses.size() << " of " << result.all_slices.size() << " slices; report: "
                  << (cfg.out / "report.json").string() << '\n';
      } catch (const std::exception& e) {
        mark_partial(cfg.out, e.what());
        throw;
      }
      return 0;
    }
    if (*synth) {
      SynthConfig config = preset == "desk" ? SynthConfig::desk_scale() : SynthConfig::fixture();
      config.seed = synth_seed;
      if (days > 0) config.n_days = days;
      if (blocks_per_day > 0) config.blocks_per_day = blocks_per_day;
      const SynthChain chain = generate_chain(config);
      write_chain(chain, synth_out);
      std::cout << "wrote " << chain.blocks.size() << " blocks, " << chain.transactions.size() << " transactions to "
                << synth_out.string() << '\n';
      return 0;
    }
    if (*exp) {
      InputFile nodes(slice_dir_path / "nodes.csv");
      InputFile edges(slice_dir_path / "edges.csv");
      const LoadedNetwork loaded = read_network(nodes.stream(), edges.stream());
      if (export_out.empty()) export_out = slice_dir_path / ("network." + export_format);
      AtomicFile out(export_out);
      if (export_format == "graphml") {
        write_graphml(out.stream(), loaded.network, loaded.stats);
      } else {
        write_dot(out.stream(), loaded.network, loaded.stats);
      }
      out.commit();
      std::cout << "wrote " << export_out.string() << '\n';
      return 0;
    }
    if (*verify) {
      const VerifyReport report = verify_slice_dir(slice_dir_path);
      for (const auto& [name, ok] : report.checks) std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
      return report.ok() ? 0 : kExitFailure;
    }
  } catch (const FileError& e) {
    std::cerr << "minergraph: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "minergraph: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
