#include "actsense/cmdp_lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace actsense {

namespace {

// Balance rows phi(s',.) - sum phi(s,a) P(s'|s,a) = 0 followed by the
// normalization row.
void fill_equalities(const TabularMdp& mdp, LinearProgram& lp) {
  const std::size_t n = mdp.num_states();
  const auto vars = static_cast<Eigen::Index>(n * kNumActions);
  lp.eq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), vars);
  lp.eq_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const auto col = static_cast<Eigen::Index>(s * kNumActions + static_cast<std::size_t>(a));
      lp.eq(static_cast<Eigen::Index>(s), col) += 1.0;
      for (const auto& [to, p] : mdp.kernel.sparse_row(s, action_from(a))) lp.eq(to, col) -= p;
    }
  }
  lp.eq.row(static_cast<Eigen::Index>(n)).setOnes();
  lp.eq_rhs(static_cast<Eigen::Index>(n)) = 1.0;
  lp.ineq.resize(0, vars);
  lp.ineq_rhs.resize(0);
}

}  // namespace

LinearProgram build_cmdp_lp(const TabularMdp& mdp, double budget) {
  const std::size_t vars = mdp.num_states() * kNumActions;
  LinearProgram lp;
  lp.objective = Eigen::Map<const Eigen::VectorXd>(mdp.cost_table.data(), static_cast<Eigen::Index>(vars));
  fill_equalities(mdp, lp);
  lp.ineq = Eigen::Map<const Eigen::RowVectorXd>(mdp.data_table.data(), static_cast<Eigen::Index>(vars));
  lp.ineq_rhs = Eigen::VectorXd::Constant(1, budget);
  return lp;
}

LinearProgram build_lagrangian_lp(const TabularMdp& mdp, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("Lagrange multiplier must be nonnegative");
  const std::size_t vars = mdp.num_states() * kNumActions;
  LinearProgram lp;
  lp.objective.resize(static_cast<Eigen::Index>(vars));
  for (std::size_t i = 0; i < vars; ++i)
    lp.objective(static_cast<Eigen::Index>(i)) = mdp.cost_table[i] + lambda * mdp.data_table[i];
  fill_equalities(mdp, lp);
  return lp;
}

StationarySolution to_stationary(const TabularMdp& mdp, const LpResult& result) {
  std::vector<double> phi(result.x.data(), result.x.data() + result.x.size());
  for (double& p : phi) p = std::max(p, 0.0);
  return with_averages(mdp, std::move(phi));
}

StationarySolution solve_cmdp(const TabularMdp& mdp, double budget, const SimplexOptions& options) {
  return to_stationary(mdp, solve_lp(build_cmdp_lp(mdp, budget), options));
}

StationarySolution solve_lagrangian(const TabularMdp& mdp, double lambda, const SimplexOptions& options) {
  return to_stationary(mdp, solve_lp(build_lagrangian_lp(mdp, lambda), options));
}

double balance_residual(const TabularMdp& mdp, const std::vector<double>& phi) {
  const std::size_t n = mdp.num_states();
  std::vector<double> inflow(n, 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const double w = phi[s * kNumActions + static_cast<std::size_t>(a)];
      total += w;
      for (const auto& [to, p] : mdp.kernel.sparse_row(s, action_from(a))) inflow[to] += w * p;
    }
  }
  double worst = std::abs(total - 1.0);
  for (std::size_t s = 0; s < n; ++s)
    worst = std::max(worst, std::abs(phi[s * kNumActions] + phi[s * kNumActions + 1] - inflow[s]));
  return worst;
}

}  // namespace actsense
