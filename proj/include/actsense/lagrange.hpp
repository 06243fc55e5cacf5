#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsense/dp.hpp"
#include "actsense/model.hpp"
#include "actsense/simplex.hpp"

namespace actsense {

/// Inner solver used to evaluate D(lambda): the Lagrangian LP (average cost)
/// or discounted value iteration followed by stationary analysis.
enum class InnerSolver { Lp, ValueIteration };

const char* to_string(InnerSolver s);

struct LagrangeOptions {
  double lambda0 = 0.1;
  double epsilon = 1e-4;
  std::size_t max_iters = 500;
  InnerSolver backend = InnerSolver::Lp;
  ViOptions vi;
  SimplexOptions simplex;
};

struct LagrangeIterate {
  std::size_t iter = 0;
  double lambda = 0.0;
  double data_usage = 0.0;
  double delta_lambda = 0.0;  // lambda_{i+1} - lambda_i after clipping at 0
};

struct LagrangeTrace {
  std::vector<LagrangeIterate> iterations;
  double lambda_star = 0.0;
  bool converged = false;
  double epsilon = 0.0;
  InnerSolver backend = InnerSolver::Lp;
};

class NoFeasibleLambda : public std::runtime_error {
 public:
  explicit NoFeasibleLambda(LagrangeTrace trace)
      : std::runtime_error("no recorded multiplier meets the data budget"), trace_(std::move(trace)) {}
  const LagrangeTrace& trace() const { return trace_; }

 private:
  LagrangeTrace trace_;
};

/// Long-run average data usage of the optimal policy at lambda.
double data_usage_at(const Problem& problem, double lambda, InnerSolver backend, const ViOptions& vi = {},
                     const SimplexOptions& simplex = {});

/// lambda_{i+1} = max(0, lambda_i + (D_i - D)/sqrt(i+1)), i from 0; stops when
/// |lambda_{i+1} - lambda_i| < epsilon or after max_iters. lambda_star is the
/// smallest recorded lambda whose usage meets the budget. A trace that hits
/// max_iters is returned with converged = false. Throws NoFeasibleLambda.
LagrangeTrace estimate_lambda(const Problem& problem, const LagrangeOptions& options = {});

struct BisectionResult {
  double lambda_star = 0.0;   // smallest bracketed lambda with D <= budget
  double lower = 0.0;         // largest bracketed lambda with D > budget
  double data_at_star = 0.0;
  double data_at_lower = 0.0;
  std::size_t evaluations = 0;
};

/// inf{lambda >= 0 : D(lambda) <= D} located by doubling then bisection to
/// width tol. D(lambda) is a step function for either backend; the result
/// brackets its crossing of the budget.
BisectionResult bisect_lambda(const Problem& problem, InnerSolver backend, double tol = 1e-6,
                              const ViOptions& vi = {});

struct LambdaGridPoint {
  double lambda = 0.0;
  double data_usage = 0.0;
};

struct OptimalityReport {
  std::vector<LambdaGridPoint> grid;
  std::vector<std::size_t> violations;  // i where D(grid[i+1]) > D(grid[i]) + tol
  double smallest_feasible = -1.0;      // first grid lambda with D <= budget, -1 if none
  double spacing = 0.0;
  bool lambda_star_consistent = false;  // |lambda_star - smallest_feasible| <= spacing

  bool monotone() const { return violations.empty(); }
};

/// Evaluates D on grid_points evenly spaced over
/// [max(0, lambda_star - grid_width), lambda_star + grid_width]. Grid points
/// are independent solves and run concurrently.
OptimalityReport lambda_optimality_check(const Problem& problem, double lambda_star, double grid_width,
                                         std::size_t grid_points, InnerSolver backend = InnerSolver::Lp,
                                         double tol = 1e-6);

/// CSV with header iter,lambda,data_usage,delta_lambda.
void write_trace_csv(const LagrangeTrace& trace, std::ostream& out);

}  // namespace actsense
