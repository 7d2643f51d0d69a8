#pragma once

// Compressive measurement and reconstruction of sparse Fourier expansions:
// Bernoulli sampling, the +-1 graph-sampling matrix, an l1-penalised least
// squares solver and the top-s / subcube post-processing.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "conas/boolean_fourier.hpp"

namespace conas {

struct MeasurementSet {
  std::vector<Encoding> encodings;
  std::vector<double> values;

  MeasurementSet() = default;
  MeasurementSet(std::vector<Encoding> encodings, std::vector<double> values);
  std::size_t size() const noexcept { return values.size(); }
};

/// Dense m x |parities| matrix with A(l,k) = chi_{S_k}(alpha_l).
struct SamplingMatrix {
  Eigen::MatrixXd values;
  std::vector<ParityIndex> parities;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

struct LassoOptions {
  double lambda = 1.0;
  double tol = 1e-8;
  int max_iter = 10000;
  bool record_trace = false;
  /// Geometric lambda continuation from lambda_max down to lambda, each step
  /// warm-starting the next; 0 solves the target lambda directly. Only the
  /// final solve at lambda is recorded in objective_trace.
  int path_steps = 10;
  /// Warm start; zero vector when empty.
  Eigen::VectorXd initial;
};

struct LassoSolution {
  Eigen::VectorXd coefficients;
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
  /// Objective after every sweep, only filled when requested.
  std::vector<double> objective_trace;
};

/// Recovery parameters shared by one stage of the search.
struct RecoveryConfig {
  double lambda = 1.0;
  std::size_t sparsity = 10;
  std::size_t degree = 2;
  double p = 0.25;
  std::size_t m = 1000;
  double tol = 1e-8;
  int max_iter = 10000;
  /// Measure every point of the free subcube instead of sampling m points.
  bool exhaustive = false;
  std::size_t subcube_cap = 24;

  void validate() const;
};

/// m encodings with each bit +1 with probability p, drawn in one pass over a
/// single stream seeded by `seed`.
std::vector<Encoding> sample_encodings(std::size_t n, double p, std::size_t m, std::uint64_t seed);

/// Every point of {-1,+1}^n, in the order of x = 0..2^n-1 with bit i set
/// meaning alpha_i = +1.
std::vector<Encoding> hypercube_points(std::size_t n);

SamplingMatrix build_sampling_matrix(std::span<const Encoding> encodings,
                                     std::vector<ParityIndex> parities);

/// argmin_x ||y - A x||_2^2 + lambda ||x||_1 by cyclic coordinate descent.
LassoSolution lasso_solve(const Eigen::MatrixXd& a, std::span<const double> y,
                          const LassoOptions& opts = {});

double lasso_objective(const Eigen::MatrixXd& a, std::span<const double> y, double lambda,
                       const Eigen::VectorXd& x);

/// Max stationarity violation of the Lasso optimality conditions at x.
double kkt_residual(const Eigen::MatrixXd& a, std::span<const double> y, double lambda,
                    const Eigen::VectorXd& x);

/// Keeps the s largest |coefficients|; ties go to the earlier parity.
FourierExpansion truncate_top_s(const Eigen::VectorXd& coefficients,
                                std::span<const ParityIndex> parities, std::size_t n,
                                std::size_t s);

struct SubcubeMinimum {
  Restriction assignment;
  double value = 0.0;
};

/// Exhaustive argmin of g over the variables that appear in it. Ties resolve
/// to the lexicographically smallest assignment with -1 < +1.
SubcubeMinimum minimize_over_support(const FourierExpansion& g, std::size_t max_variables = 24);

void to_json(nlohmann::json& j, const LassoSolution& s);

}  // namespace conas
