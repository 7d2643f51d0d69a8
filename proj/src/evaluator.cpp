#include "conas/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string_view>
#include <thread>

namespace conas {

FunctionEvaluator::FunctionEvaluator(std::size_t n, Fn fn, bool thread_safe)
    : n_(n), fn_(std::move(fn)), thread_safe_(thread_safe) {
  if (!fn_) throw std::invalid_argument("FunctionEvaluator needs a callable");
}

double FunctionEvaluator::evaluate(const Encoding& alpha) const {
  if (alpha.size() != n_) {
    throw std::invalid_argument("evaluator expects length " + std::to_string(n_) + ", got " +
                                std::to_string(alpha.size()));
  }
  return fn_(alpha);
}

RestrictedEvaluator::RestrictedEvaluator(EvaluatorPtr base, Restriction rho)
    : base_(std::move(base)), rho_(std::move(rho)) {
  if (!base_) throw std::invalid_argument("restricted evaluator needs a base evaluator");
  if (base_->dimension() != rho_.dimension()) {
    throw std::invalid_argument("restriction dimension " + std::to_string(rho_.dimension()) +
                                " does not match evaluator dimension " +
                                std::to_string(base_->dimension()));
  }
}

double RestrictedEvaluator::evaluate(const Encoding& alpha) const {
  return base_->evaluate(merge_point(alpha, rho_));
}

EvaluatorPtr restrict_oracle(EvaluatorPtr f, const Restriction& rho) {
  if (!f) throw std::invalid_argument("restrict_oracle needs an evaluator");
  // Flatten nested restrictions so each call merges once.
  if (auto nested = std::dynamic_pointer_cast<const RestrictedEvaluator>(f)) {
    return std::make_shared<RestrictedEvaluator>(nested->base(),
                                                 nested->restriction().compose(rho));
  }
  return std::make_shared<RestrictedEvaluator>(std::move(f), rho);
}

unsigned evaluation_threads() {
  unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONAS_THREADS")) {
    std::string_view text(env);
    unsigned cap = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec == std::errc() && ptr == text.data() + text.size() && cap > 0) return cap;
  }
  return hw;
}

std::vector<double> evaluate_batch(const Evaluator& f, std::span<const Encoding> points,
                                   unsigned threads) {
  std::vector<double> out(points.size());
  const std::size_t workers =
      std::min<std::size_t>(f.thread_safe() ? std::max(1U, threads) : 1U, points.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = f.evaluate(points[i]);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < points.size(); i = next++) out[i] = f.evaluate(points[i]);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = points.size();
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace conas
