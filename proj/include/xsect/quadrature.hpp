#pragma once

#include <atomic>
#include <functional>

#include "xsect/error.hpp"
#include "xsect/parallel.hpp"

namespace xsect {

struct QuadratureOptions {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  int max_panels = 2000;                 // per one-dimensional integral
  long long max_evaluations = 200'000'000;  // shared by all nested levels
  // Piecewise-constant integrands on finite intervals: panels also sample
  // their endpoints and count max - min times the width as error, so a jump
  // between Gauss nodes cannot go unnoticed.
  bool discontinuous = false;
  int initial_panels = 1;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Evaluation counter shared by nested integrals. Once the budget is spent,
/// every level stops refining and returns what it has.
class QuadratureBudget {
 public:
  explicit QuadratureBudget(long long limit) : limit_(limit) {}
  void spend(long long n) { used_.fetch_add(n, std::memory_order_relaxed); }
  long long used() const { return used_.load(std::memory_order_relaxed); }
  bool exhausted() const { return used() >= limit_; }

 private:
  long long limit_;
  std::atomic<long long> used_{0};
};

/// BudgetExceeded carrying the partial estimate.
class QuadratureBudgetError : public Error {
 public:
  QuadratureBudgetError(double estimate, double error_bound, long long evaluations);
  double estimate;
  double error_bound;
  long long evaluations;
};

/// Adaptive 15-point Gauss-Kronrod integration of f over [a, b]; either
/// bound may be infinite. Panels are refined worst-first until the error is
/// below max(abs_tol, rel_tol |I|). Parallel execution evaluates the nodes of
/// each panel concurrently; the result does not depend on it.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts, QuadratureBudget& budget,
                           Execution exec = Execution::Serial);

/// Same with a private budget; throws QuadratureBudgetError when it runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

}  // namespace xsect
