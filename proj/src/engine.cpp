#include "conas/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "conas/seeding.hpp"

namespace conas {

namespace {

constexpr std::size_t kMaxExhaustiveDimension = 20;

std::vector<Encoding> stage_samples(const SearchOptions& opts, const Restriction& cumulative,
                                    std::uint64_t seed) {
  const std::size_t free = cumulative.free_count();
  const auto& rc = opts.recovery;
  if (rc.exhaustive) {
    if (free > kMaxExhaustiveDimension) {
      throw std::invalid_argument("exhaustive measurement over " + std::to_string(free) +
                                  " free coordinates exceeds the cap of " +
                                  std::to_string(kMaxExhaustiveDimension));
    }
    return hypercube_points(free);
  }
  auto samples = sample_encodings(free, rc.p, rc.m, derive_seed(seed, streams::kSampling));
  if (!opts.repair_connectivity) return samples;

  const auto& spec = *opts.cell;
  const auto free_coords = cumulative.free_coordinates();
  for (std::size_t l = 0; l < samples.size(); ++l) {
    const Encoding full = repair_connectivity(merge_point(samples[l], cumulative), spec,
                                              derive_seed(seed, streams::kRepair, l), cumulative);
    std::vector<std::int8_t> bits(free_coords.size());
    for (std::size_t k = 0; k < free_coords.size(); ++k) bits[k] = full[free_coords[k]];
    samples[l] = Encoding(std::move(bits));
  }
  return samples;
}

}  // namespace

StageStatistics stage_statistics(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("stage statistics need at least one value");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  StageStatistics s;
  s.mean = mean;
  s.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.min = *std::min_element(values.begin(), values.end());
  return s;
}

StageResult run_stage(const EvaluatorPtr& f, const Restriction& cumulative,
                      const SearchOptions& opts, std::size_t stage, std::uint64_t seed) {
  if (!f) throw std::invalid_argument("run_stage needs an evaluator");
  if (cumulative.dimension() != f->dimension()) {
    throw std::invalid_argument("cumulative restriction dimension does not match evaluator");
  }
  opts.recovery.validate();
  if (opts.repair_connectivity) {
    if (!opts.cell) throw std::invalid_argument("connectivity repair needs a cell spec");
    if (edge_count(*opts.cell) != f->dimension()) {
      throw std::invalid_argument("cell spec edge count does not match evaluator dimension");
    }
  }

  StageResult out;
  out.stage = stage;
  out.seed = seed;
  out.free_dimension = cumulative.free_count();
  if (out.free_dimension == 0) throw std::invalid_argument("no free coordinates left to search");

  out.degree = opts.recovery.degree;
  if (out.degree > out.free_dimension) {
    out.warnings.push_back("degree " + std::to_string(out.degree) + " clamped to free dimension " +
                           std::to_string(out.free_dimension));
    out.degree = out.free_dimension;
  }
  out.sparsity = stage < opts.sparsity_schedule.size() ? opts.sparsity_schedule[stage]
                                                       : opts.recovery.sparsity;
  if (out.sparsity < 1) throw std::invalid_argument("sparsity s must be at least 1");

  const auto restricted = restrict_oracle(f, cumulative);
  const auto samples = stage_samples(opts, cumulative, seed);
  out.measurements = samples.size();
  out.values = evaluate_batch(*restricted, samples, opts.threads);
  out.stats = stage_statistics(out.values);

  const auto matrix = build_sampling_matrix(samples, enumerate_parities(out.free_dimension, out.degree));
  LassoOptions lasso;
  lasso.lambda = opts.recovery.lambda;
  lasso.tol = opts.recovery.tol;
  lasso.max_iter = opts.recovery.max_iter;
  const auto solution = lasso_solve(matrix.values, out.values, lasso);
  out.lasso_iterations = solution.iterations;
  out.lasso_objective = solution.objective;
  out.lasso_kkt_residual = solution.kkt_residual;
  out.lasso_converged = solution.converged;
  if (!solution.converged) out.warnings.push_back("lasso stopped at max_iter before converging");

  out.surrogate = truncate_top_s(solution.coefficients, matrix.parities, out.free_dimension, out.sparsity);
  const auto minimum = minimize_over_support(out.surrogate, opts.recovery.subcube_cap);
  out.surrogate_min = minimum.value;
  out.cumulative = cumulative.compose(minimum.assignment);

  Restriction::Fixed newly;
  for (const auto& [c, v] : out.cumulative.fixed()) {
    if (!cumulative.is_fixed(c)) newly.emplace(c, v);
  }
  out.assignment = Restriction(cumulative.dimension(), std::move(newly));
  if (!opts.keep_measurements) out.values.clear();
  return out;
}

Encoding final_encoding(const Restriction& cumulative, std::size_t n) {
  if (cumulative.dimension() != n) {
    throw std::invalid_argument("restriction dimension does not match n");
  }
  std::vector<std::int8_t> bits(n, -1);
  for (const auto& [c, v] : cumulative.fixed()) bits[c] = v;
  return Encoding(std::move(bits));
}

SearchResult conas_search(const EvaluatorPtr& f, const SearchOptions& opts, std::size_t stages,
                          std::uint64_t seed) {
  if (!f) throw std::invalid_argument("conas_search needs an evaluator");
  if (stages < 1) throw std::invalid_argument("number of stages t must be at least 1");
  if (opts.cell && edge_count(*opts.cell) != f->dimension()) {
    throw std::invalid_argument("cell spec edge count " + std::to_string(edge_count(*opts.cell)) +
                                " does not match evaluator dimension " +
                                std::to_string(f->dimension()));
  }

  SearchResult result;
  result.requested_stages = stages;
  result.seed = seed;
  result.options = opts;

  Restriction cumulative(f->dimension());
  for (std::size_t k = 0; k < stages; ++k) {
    if (cumulative.free_count() == 0) {
      result.stopped_early = true;
      break;
    }
    auto stage = run_stage(f, cumulative, opts, k, derive_seed(seed, streams::kStage, k));
    cumulative = stage.cumulative;
    result.stages.push_back(std::move(stage));
  }

  result.final_encoding = final_encoding(cumulative, f->dimension());
  if (opts.cell) result.final_cell = decode_cell(*opts.cell, result.final_encoding);
  return result;
}

void to_json(nlohmann::json& j, const StageStatistics& s) {
  j = {{"mean", s.mean}, {"std", s.std}, {"min", s.min}};
}

void to_json(nlohmann::json& j, const StageResult& s) {
  j = {{"stage", s.stage},
       {"seed", s.seed},
       {"free_dimension", s.free_dimension},
       {"degree", s.degree},
       {"sparsity", s.sparsity},
       {"measurements", s.measurements},
       {"warnings", s.warnings},
       {"stats", s.stats},
       {"lasso",
        {{"iterations", s.lasso_iterations},
         {"objective", s.lasso_objective},
         {"kkt_residual", s.lasso_kkt_residual},
         {"converged", s.lasso_converged}}},
       {"surrogate", s.surrogate},
       {"surrogate_min", s.surrogate_min},
       {"assignment", s.assignment},
       {"cumulative", s.cumulative}};
}

void to_json(nlohmann::json& j, const SearchResult& r) {
  const auto& rc = r.options.recovery;
  j = {{"seed", r.seed},
       {"requested_stages", r.requested_stages},
       {"stopped_early", r.stopped_early},
       {"config",
        {{"lambda", rc.lambda},
         {"sparsity", rc.sparsity},
         {"sparsity_schedule", r.options.sparsity_schedule},
         {"degree", rc.degree},
         {"p", rc.p},
         {"m", rc.m},
         {"tol", rc.tol},
         {"max_iter", rc.max_iter},
         {"exhaustive", rc.exhaustive},
         {"repair_connectivity", r.options.repair_connectivity}}},
       {"stages", r.stages},
       {"final_encoding", r.final_encoding.to_binary()},
       {"final_active", r.final_encoding.count_active()}};
  if (r.final_cell) j["cell"] = *r.final_cell;
}

}  // namespace conas
