// conas: command-line front end for the sparse-recovery search toolkit.
//
//   conas search --config run.json --out results/ [--seed 7]
//   conas phase  --config phase.json --out results/
//   conas stages --config run.json --out results/
//   conas count  --nodes 7 --ops 5 --kinds 2 [--json]
//   conas dft    --config oracle.json --out results/
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "conas/errors.hpp"
#include "conas/harness.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config, "Run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "Master seed (overrides the config)");
}

conas::RunConfig load(const CommonArgs& args) {
  auto cfg = conas::load_run_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Fourier recovery and multi-stage architecture search"};
  app.require_subcommand(1);

  CommonArgs search_args, phase_args, stages_args, dft_args, count_args;
  auto* search = app.add_subcommand("search", "Run the multi-stage search and write search_result.json");
  add_common(search, search_args);
  auto* phase = app.add_subcommand("phase", "Recovery-rate sweep over measurement counts (phase.csv)");
  add_common(phase, phase_args);
  auto* stages = app.add_subcommand("stages", "Per-stage measurement statistics (stages.csv)");
  add_common(stages, stages_args);
  auto* dft = app.add_subcommand("dft", "Exact Fourier transform of the configured oracle");
  add_common(dft, dft_args);

  auto* count = app.add_subcommand("count", "Edge count and configuration counts of a cell space");
  add_common(count, count_args, false);
  std::size_t nodes = 7, ops = 5, kinds = 2, inputs = 2;
  bool as_json = false;
  count->add_option("--nodes", nodes, "Nodes per cell (N)")->capture_default_str();
  count->add_option("--ops", ops, "Number of candidate operations (K)")->capture_default_str();
  count->add_option("--kinds", kinds, "Number of cell kinds")->capture_default_str();
  count->add_option("--inputs", inputs, "Input nodes per cell")->capture_default_str();
  count->add_flag("--json", as_json, "Print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*search) {
      const auto r = conas::cmd_search(load(search_args), search_args.out);
      std::cerr << "search: " << r.stages.size() << " stage(s), " << r.final_encoding.count_active()
                << " active bits of " << r.final_encoding.size() << "\n";
    } else if (*phase) {
      const auto rows = conas::cmd_phase(load(phase_args), phase_args.out);
      std::cerr << "phase: " << rows.size() << " rows\n";
    } else if (*stages) {
      const auto r = conas::cmd_stages(load(stages_args), stages_args.out);
      for (const auto& st : r.stages) {
        std::cerr << "stage " << st.stage << ": mean " << st.stats.mean << " std " << st.stats.std
                  << " min " << st.stats.min << "\n";
      }
    } else if (*dft) {
      const auto g = conas::cmd_dft(load(dft_args), dft_args.out);
      std::cerr << "dft: " << g.size() << " nonzero coefficient(s)\n";
    } else if (*count) {
      conas::CellSpec spec;
      if (!count_args.config.empty()) {
        const auto cfg = load(count_args);
        if (!cfg.cell) throw conas::ConfigError("count config needs a cell_spec");
        spec = *cfg.cell;
      } else {
        spec.nodes = nodes;
        spec.inputs = inputs;
        for (std::size_t k = 0; k < ops; ++k) {
          spec.operations.push_back(k < 5 ? conas::CellSpec::default_operations()[k]
                                          : "op" + std::to_string(k));
        }
        for (std::size_t k = 0; k < kinds; ++k) {
          spec.kinds.push_back(kinds == 2 ? (k == 0 ? "normal" : "reduce") : "kind" + std::to_string(k));
        }
        try {
          spec.validate();
        } catch (const std::invalid_argument& e) {
          throw conas::ConfigError(e.what());
        }
      }
      const auto report = conas::count_report(spec);
      const auto j = conas::count_json(report);
      if (as_json) {
        std::cout << conas::dump_json(j);
      } else {
        std::cout << conas::count_text(report);
      }
      if (count->count("--out")) conas::write_text(std::filesystem::path(count_args.out) / "count.json", conas::dump_json(j));
    }
  } catch (const conas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
