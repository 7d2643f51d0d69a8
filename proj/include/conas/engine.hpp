#pragma once

// Multi-stage search: measure, recover a sparse surrogate, minimize it on its
// support, fix those bits, repeat on the remaining coordinates.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conas/evaluator.hpp"
#include "conas/search_space.hpp"
#include "conas/sparse_recovery.hpp"

namespace conas {

struct StageStatistics {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n-1 denominator
  double min = 0.0;
};

StageStatistics stage_statistics(std::span<const double> values);

struct SearchOptions {
  RecoveryConfig recovery;
  /// Optional per-stage sparsity; stage k uses entry k when present.
  std::vector<std::size_t> sparsity_schedule;
  /// Repair connectivity of sampled encodings before evaluation. Needs a cell.
  bool repair_connectivity = false;
  std::optional<CellSpec> cell;
  unsigned threads = 1;
  /// Keep per-stage measurement vectors in the result.
  bool keep_measurements = false;
};

struct StageResult {
  std::size_t stage = 0;
  std::size_t free_dimension = 0;
  std::size_t degree = 0;
  std::size_t sparsity = 0;
  std::size_t measurements = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
  StageStatistics stats;
  int lasso_iterations = 0;
  double lasso_objective = 0.0;
  double lasso_kkt_residual = 0.0;
  bool lasso_converged = false;
  /// Surrogate over the stage's reduced coordinates.
  FourierExpansion surrogate;
  double surrogate_min = 0.0;
  /// Bits fixed by this stage, in original coordinates.
  Restriction assignment;
  Restriction cumulative;
  std::vector<double> values;
};

struct SearchResult {
  std::vector<StageResult> stages;
  Encoding final_encoding;
  std::optional<Cell> final_cell;
  bool stopped_early = false;
  std::size_t requested_stages = 0;
  std::uint64_t seed = 0;
  SearchOptions options;
};

StageResult run_stage(const EvaluatorPtr& f, const Restriction& cumulative,
                      const SearchOptions& opts, std::size_t stage, std::uint64_t seed);

/// Stage k uses derive_seed(seed, streams::kStage, k).
SearchResult conas_search(const EvaluatorPtr& f, const SearchOptions& opts, std::size_t stages,
                          std::uint64_t seed);

/// Fixed coordinates keep their values; everything else is -1 (inactive).
Encoding final_encoding(const Restriction& cumulative, std::size_t n);

void to_json(nlohmann::json& j, const StageStatistics& s);
void to_json(nlohmann::json& j, const StageResult& s);
void to_json(nlohmann::json& j, const SearchResult& r);

}  // namespace conas
