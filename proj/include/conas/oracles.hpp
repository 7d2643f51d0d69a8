#pragma once

// Ground-truth evaluators standing in for a trained one-shot model.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>

#include "conas/evaluator.hpp"

namespace conas {

/// Evaluates a hidden Fourier expansion exactly.
class PlantedOracle final : public Evaluator {
 public:
  explicit PlantedOracle(FourierExpansion hidden);

  std::size_t dimension() const override { return hidden_.dimension(); }
  double evaluate(const Encoding& alpha) const override { return expansion_eval(hidden_, alpha); }
  const FourierExpansion& hidden() const noexcept { return hidden_; }

 private:
  FourierExpansion hidden_;
};

struct PlantOptions {
  std::size_t n = 0;
  std::size_t sparsity = 0;
  std::size_t degree = 2;
  double magnitude_lo = 1.0;
  double magnitude_hi = 2.0;
};

/// `sparsity` distinct non-constant parities of degree <= `degree`, drawn
/// uniformly without replacement, with coefficients +-U[lo, hi].
std::shared_ptr<const PlantedOracle> make_planted(const PlantOptions& opts, std::uint64_t seed);

/// Complete binary tree; an internal node sends alpha_c = -1 left and +1 right.
class DecisionTreeOracle final : public Evaluator {
 public:
  struct Node {
    Coord coordinate = 0;  // internal nodes only
    double value = 0.0;    // leaves only
  };

  DecisionTreeOracle(std::size_t n, std::size_t depth, std::vector<Node> nodes);

  std::size_t dimension() const override { return n_; }
  double evaluate(const Encoding& alpha) const override;
  std::size_t depth() const noexcept { return depth_; }
  /// Heap layout: node i has children 2i+1 (alpha = -1) and 2i+2 (alpha = +1).
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::size_t n_;
  std::size_t depth_;
  std::vector<Node> nodes_;
};

/// Random tree of the given depth with distinct coordinates on every path and
/// standard-normal leaves.
std::shared_ptr<const DecisionTreeOracle> make_decision_tree(std::size_t n, std::size_t depth,
                                                             std::uint64_t seed);

/// Adds N(0, sigma^2) noise. Call k draws its noise from (seed, k), so a rerun
/// with the same call order reproduces the sequence; concurrent calls would
/// race on k, hence not thread safe.
class NoisyOracle final : public Evaluator {
 public:
  NoisyOracle(EvaluatorPtr base, double sigma, std::uint64_t seed);

  std::size_t dimension() const override { return base_->dimension(); }
  double evaluate(const Encoding& alpha) const override;
  bool thread_safe() const override { return false; }
  bool stochastic() const override { return sigma_ > 0.0; }

 private:
  EvaluatorPtr base_;
  double sigma_;
  std::uint64_t seed_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

EvaluatorPtr wrap_noise(EvaluatorPtr f, double sigma, std::uint64_t seed);

/// Lookup table keyed by encoding, loaded from `encoding,value` CSV.
class TabularOracle final : public Evaluator {
 public:
  TabularOracle(std::size_t n, std::map<Encoding, double> table,
                std::optional<double> missing_penalty = std::nullopt);

  std::size_t dimension() const override { return n_; }
  double evaluate(const Encoding& alpha) const override;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::size_t n_;
  std::map<Encoding, double> table_;
  std::optional<double> missing_penalty_;
};

/// Without a penalty, lookups of absent encodings throw.
std::shared_ptr<const TabularOracle> load_tabular(const std::filesystem::path& path,
                                                  std::optional<double> missing_penalty = std::nullopt);

/// Writes f on all 2^n points in the tabular CSV format.
void dump_tabular(const Evaluator& f, const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace conas
