#include "actsense/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>

#include "actsense/cmdp_lp.hpp"
#include "actsense/csv.hpp"
#include "actsense/stationary.hpp"

namespace actsense {

const char* to_string(InnerSolver s) {
  return s == InnerSolver::Lp ? "lp" : "value-iteration";
}

double data_usage_at(const Problem& problem, double lambda, InnerSolver backend, const ViOptions& vi,
                     const SimplexOptions& simplex) {
  const TabularMdp& mdp = problem.mdp();
  if (backend == InnerSolver::Lp) return solve_lagrangian(mdp, lambda, simplex).data_usage;
  const ViResult r = value_iteration(mdp, lambda, problem.model().discount, vi);
  return stationary_distribution(mdp, Policy::from(r.policy)).data_usage;
}

LagrangeTrace estimate_lambda(const Problem& problem, const LagrangeOptions& options) {
  if (!(options.lambda0 > 0.0)) throw std::invalid_argument("initial multiplier must be positive");
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double budget = problem.model().budget;

  LagrangeTrace trace;
  trace.epsilon = options.epsilon;
  trace.backend = options.backend;
  double lambda = options.lambda0;
  for (std::size_t i = 0; i < options.max_iters; ++i) {
    const double usage = data_usage_at(problem, lambda, options.backend, options.vi, options.simplex);
    const double next = std::max(0.0, lambda + (usage - budget) / std::sqrt(static_cast<double>(i + 1)));
    trace.iterations.push_back({i, lambda, usage, next - lambda});
    if (std::abs(next - lambda) < options.epsilon) {
      trace.converged = true;
      break;
    }
    lambda = next;
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& it : trace.iterations)
    if (it.data_usage <= budget && it.lambda < best) best = it.lambda;
  if (!std::isfinite(best)) throw NoFeasibleLambda(std::move(trace));
  trace.lambda_star = best;
  return trace;
}

BisectionResult bisect_lambda(const Problem& problem, InnerSolver backend, double tol, const ViOptions& vi) {
  if (!(tol > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  const double budget = problem.model().budget;
  BisectionResult r;
  auto usage = [&](double lam) {
    ++r.evaluations;
    return data_usage_at(problem, lam, backend, vi);
  };
  double lo = 0.0, d_lo = usage(0.0);
  if (d_lo <= budget) {
    r.data_at_star = r.data_at_lower = d_lo;
    return r;
  }
  double hi = 1.0, d_hi = usage(hi);
  for (int k = 0; d_hi > budget; ++k) {
    if (k == 60) throw NoFeasibleLambda({});
    lo = hi, d_lo = d_hi;
    hi *= 2.0;
    d_hi = usage(hi);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double d = usage(mid);
    if (d <= budget) hi = mid, d_hi = d;
    else lo = mid, d_lo = d;
  }
  r.lambda_star = hi;
  r.lower = lo;
  r.data_at_star = d_hi;
  r.data_at_lower = d_lo;
  return r;
}

OptimalityReport lambda_optimality_check(const Problem& problem, double lambda_star, double grid_width,
                                         std::size_t grid_points, InnerSolver backend, double tol) {
  if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
  const double lo = std::max(0.0, lambda_star - grid_width);
  const double hi = lambda_star + grid_width;
  OptimalityReport rep;
  rep.spacing = (hi - lo) / static_cast<double>(grid_points - 1);
  rep.grid.resize(grid_points);
  const auto count = static_cast<std::ptrdiff_t>(grid_points);
  std::vector<std::exception_ptr> errors(grid_points);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double lam = lo + rep.spacing * static_cast<double>(i);
    try {
      rep.grid[k] = {lam, data_usage_at(problem, lam, backend)};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::size_t i = 0; i + 1 < grid_points; ++i)
    if (rep.grid[i + 1].data_usage > rep.grid[i].data_usage + tol) rep.violations.push_back(i);
  for (const auto& g : rep.grid) {
    if (g.data_usage <= problem.model().budget) {
      rep.smallest_feasible = g.lambda;
      break;
    }
  }
  rep.lambda_star_consistent =
      rep.smallest_feasible >= 0.0 && std::abs(lambda_star - rep.smallest_feasible) <= rep.spacing + 1e-12;
  return rep;
}

void write_trace_csv(const LagrangeTrace& trace, std::ostream& out) {
  CsvWriter w(out, {"iter", "lambda", "data_usage", "delta_lambda"});
  for (const auto& it : trace.iterations) w.row(it.iter, it.lambda, it.data_usage, it.delta_lambda);
}

}  // namespace actsense
