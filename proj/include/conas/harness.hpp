#pragma once

// Experiment runners behind the command-line tool. Each runner is a pure
// function of its RunConfig (including the master seed) and writes its
// primary outputs into an output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "conas/engine.hpp"
#include "conas/oracles.hpp"

namespace conas {

struct OracleConfig {
  std::string kind = "planted";  // planted | tree | tabular | constant | parity | expansion
  std::optional<std::size_t> n;
  std::size_t sparsity = 20;
  std::size_t degree = 2;
  double magnitude_lo = 1.0;
  double magnitude_hi = 2.0;
  std::size_t depth = 3;
  double value = 0.0;
  std::vector<Coord> indices;
  double coefficient = 1.0;
  std::filesystem::path path;
  std::optional<double> missing_penalty;
  std::optional<FourierExpansion> expansion;
  std::optional<std::uint64_t> seed;
  double noise_sigma = 0.0;
};

struct PhaseConfig {
  std::vector<std::size_t> m_grid;
  std::size_t trials = 20;
  PlantOptions plant{50, 10, 2, 1.0, 2.0};
};

struct RunConfig {
  RecoveryConfig recovery;
  std::vector<std::size_t> sparsity_schedule;
  std::size_t stages = 4;
  std::uint64_t seed = 0;
  bool repair_connectivity = false;
  bool measurements_csv = false;
  OracleConfig oracle;
  std::optional<CellSpec> cell;
  std::optional<PhaseConfig> phase;

  RunConfig() { recovery.m = 1000; }
};

/// Strict parse: unknown keys and out-of-range values raise ConfigError.
/// Relative tabular paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Dimension of the configured oracle (cell edge count when n is omitted).
std::size_t oracle_dimension(const RunConfig& cfg);
EvaluatorPtr build_oracle(const RunConfig& cfg);

SearchOptions search_options(const RunConfig& cfg);

/// search_result.json, plus cell.json with a cell spec and measurements.csv
/// when requested.
SearchResult cmd_search(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct PhaseRow {
  std::size_t m = 0;
  std::size_t trial = 0;
  bool support_recovered = false;
  double coefficient_error = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

/// phase.csv sorted by (m, trial). Trial k uses the same plant and a nested
/// prefix of one sample stream for every m.
std::vector<PhaseRow> cmd_phase(const RunConfig& cfg, const std::filesystem::path& out_dir);
std::vector<PhaseRow> run_phase(const RunConfig& cfg);

/// stages.csv with one row per executed stage.
SearchResult cmd_stages(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct CountReport {
  std::size_t edges = 0;
  std::size_t active = 0;
  BigInt configurations;
  BigInt darts;
};

CountReport count_report(const CellSpec& spec);
nlohmann::json count_json(const CountReport& r);
std::string count_text(const CountReport& r);

/// expansion.json with the exact transform of the configured oracle.
FourierExpansion cmd_dft(const RunConfig& cfg, const std::filesystem::path& out_dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string dump_json(const nlohmann::json& j);

}  // namespace conas
