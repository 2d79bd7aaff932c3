#pragma once

// Smooth local optimization used by the witness searches: limited-memory BFGS
// for unconstrained problems and a Powell-Hestenes-Rockafellar augmented
// Lagrangian on top of it for g(x) <= 0, h(x) = 0 constraints.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace srdp::opt {

/// Objective and constraint values with their gradients at one point.
struct Evaluation {
  double f = 0.0;
  std::vector<double> grad_f;
  std::vector<double> ineq;  // feasible when <= 0
  std::vector<std::vector<double>> grad_ineq;
  std::vector<double> eq;  // feasible when == 0
  std::vector<std::vector<double>> grad_eq;

  void resize(std::size_t dim, std::size_t n_ineq, std::size_t n_eq);
  double max_violation() const;
};

using Evaluator = std::function<void(std::span<const double> x, Evaluation& out)>;

/// Value-only form used with finite differences.
using ValueFunction = std::function<void(std::span<const double> x, double& f,
                                         std::span<double> ineq, std::span<double> eq)>;

/// Wraps a value-only function with central-difference gradients.
Evaluator finite_difference(ValueFunction values, std::size_t n_ineq, std::size_t n_eq,
                            double step = 1e-6);

struct LbfgsOptions {
  int max_iterations = 400;
  int history = 8;
  double grad_tol = 1e-9;
  double f_tol = 1e-15;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// `fg` returns f(x) and writes the gradient into its second argument.
using ValueAndGradient = std::function<double(std::span<const double>, std::span<double>)>;

LbfgsResult lbfgs_minimize(const ValueAndGradient& fg, std::vector<double> x0,
                           const LbfgsOptions& options = {});

struct AugLagOptions {
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e9;
  int max_outer = 25;
  double feasibility_tol = 1e-9;
  LbfgsOptions inner{};
};

struct AugLagResult {
  std::vector<double> x;
  Evaluation at_x;
  double max_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

AugLagResult augmented_lagrangian(const Evaluator& evaluate, std::size_t dim, std::size_t n_ineq,
                                  std::size_t n_eq, std::vector<double> x0,
                                  const AugLagOptions& options = {});

/// Row-wise softmax of a rows x cols logit matrix.
void softmax_rows(std::span<const double> logits, std::size_t rows, std::size_t cols,
                  std::span<double> out);

/// Gradient with respect to the logits, given the gradient `g` with respect
/// to the softmax probabilities.
void softmax_pullback(std::span<const double> probs, std::size_t rows, std::size_t cols,
                      std::span<const double> g, std::span<double> out);

}  // namespace srdp::opt
