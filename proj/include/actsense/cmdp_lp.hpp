#pragma once

#include "actsense/model.hpp"
#include "actsense/policy.hpp"
#include "actsense/simplex.hpp"

namespace actsense {

/// Variables phi(s,a) in state-index order, sleep before active.
/// minimize sum phi c  s.t.  sum phi d <= budget, one balance row per state,
/// sum phi = 1, phi >= 0.
LinearProgram build_cmdp_lp(const TabularMdp& mdp, double budget);

/// Same variables and equalities, no budget row, objective c + lambda d.
/// Throws std::invalid_argument for lambda < 0.
LinearProgram build_lagrangian_lp(const TabularMdp& mdp, double lambda);

/// Clips tiny negatives and converts an LP point into an occupation measure.
StationarySolution to_stationary(const TabularMdp& mdp, const LpResult& result);

/// Convenience wrappers: build, solve, convert.
StationarySolution solve_cmdp(const TabularMdp& mdp, double budget, const SimplexOptions& options = {});
StationarySolution solve_lagrangian(const TabularMdp& mdp, double lambda, const SimplexOptions& options = {});

/// Largest balance / normalization violation of an occupation measure.
double balance_residual(const TabularMdp& mdp, const std::vector<double>& phi);

}  // namespace actsense
