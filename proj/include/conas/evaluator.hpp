#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "conas/boolean_fourier.hpp"

namespace conas {

/// Black-box objective on {-1,+1}^n. Lower values are better.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::size_t dimension() const = 0;
  virtual double evaluate(const Encoding& alpha) const = 0;
  /// True when evaluate may be called concurrently from several threads.
  virtual bool thread_safe() const { return true; }
  /// True when repeated calls at the same point may return different values.
  virtual bool stochastic() const { return false; }
};

using EvaluatorPtr = std::shared_ptr<const Evaluator>;

/// Wraps a callable. Thread safety must be declared by the caller.
class FunctionEvaluator final : public Evaluator {
 public:
  using Fn = std::function<double(const Encoding&)>;
  FunctionEvaluator(std::size_t n, Fn fn, bool thread_safe = true);

  std::size_t dimension() const override { return n_; }
  double evaluate(const Encoding& alpha) const override;
  bool thread_safe() const override { return thread_safe_; }

 private:
  std::size_t n_;
  Fn fn_;
  bool thread_safe_;
};

/// f restricted by rho: an evaluator over the free coordinates of rho.
class RestrictedEvaluator final : public Evaluator {
 public:
  RestrictedEvaluator(EvaluatorPtr base, Restriction rho);

  std::size_t dimension() const override { return rho_.free_count(); }
  double evaluate(const Encoding& alpha) const override;
  bool thread_safe() const override { return base_->thread_safe(); }
  bool stochastic() const override { return base_->stochastic(); }

  const Restriction& restriction() const noexcept { return rho_; }
  const EvaluatorPtr& base() const noexcept { return base_; }

 private:
  EvaluatorPtr base_;
  Restriction rho_;
};

EvaluatorPtr restrict_oracle(EvaluatorPtr f, const Restriction& rho);

/// Thread cap from CONAS_THREADS, falling back to hardware concurrency.
unsigned evaluation_threads();

/// Evaluates every point; output order follows input order regardless of
/// scheduling. Runs sequentially unless f is thread safe and threads > 1.
std::vector<double> evaluate_batch(const Evaluator& f, std::span<const Encoding> points,
                                   unsigned threads);

}  // namespace conas
