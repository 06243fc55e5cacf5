#include "actsense/dp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace actsense {

namespace {

void check_args(double lambda, double beta) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
}

double backup(const TabularMdp& mdp, const std::vector<double>& v, std::size_t s, Action a, double lambda,
              double beta) {
  double acc = 0.0;
  for (const auto& [to, p] : mdp.kernel.sparse_row(s, a)) acc += p * v[to];
  return mdp.lagrangian_cost(s, a, lambda) + beta * acc;
}

ViResult finish(const TabularMdp& mdp, std::vector<double> v, double lambda, double beta, std::size_t sweeps,
                double residual, std::vector<double> residuals) {
  ViResult r;
  r.value.v = std::move(v);
  r.q = q_from_value(mdp, r.value, lambda, beta);
  r.policy = greedy_policy(r.q);
  r.sweeps = sweeps;
  r.residual = residual;
  r.residuals = std::move(residuals);
  return r;
}

}  // namespace

double QTable::min_at(std::size_t s) const {
  return std::min((*this)(s, Action::Sleep), (*this)(s, Action::Active));
}

Action greedy_action(const QTable& q, std::size_t s, double tie_tol) {
  return q(s, Action::Active) < q(s, Action::Sleep) - tie_tol ? Action::Active : Action::Sleep;
}

DeterministicPolicy greedy_policy(const QTable& q, double tie_tol) {
  DeterministicPolicy p = DeterministicPolicy::constant(q.num_states(), Action::Sleep);
  for (std::size_t s = 0; s < q.num_states(); ++s) p[s] = greedy_action(q, s, tie_tol);
  return p;
}

QTable q_from_value(const TabularMdp& mdp, const ValueTable& v, double lambda, double beta) {
  QTable q(mdp.num_states());
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < kNumActions; ++a) q(s, action_from(a)) = backup(mdp, v.v, s, action_from(a), lambda, beta);
  return q;
}

ViResult value_iteration(const TabularMdp& mdp, double lambda, double beta, const ViOptions& options) {
  check_args(lambda, beta);
  const std::size_t n = mdp.num_states();
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::vector<double> v(n, 0.0), next(n, 0.0);
  std::vector<double> residuals;
  double residual = 0.0;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto s = static_cast<std::size_t>(i);
      const double best = std::min(backup(mdp, v, s, Action::Sleep, lambda, beta),
                                   backup(mdp, v, s, Action::Active, lambda, beta));
      residual = std::max(residual, std::abs(best - v[s]));
      next[s] = best;
    }
    v.swap(next);
    if (options.record_residuals) residuals.push_back(residual);
    if (residual <= options.tol) return finish(mdp, std::move(v), lambda, beta, sweep, residual, std::move(residuals));
  }
  throw NotConverged("value iteration did not converge, residual " + std::to_string(residual), residual);
}

namespace serial {

ViResult value_iteration(const TabularMdp& mdp, double lambda, double beta, const ViOptions& options) {
  check_args(lambda, beta);
  const std::size_t n = mdp.num_states();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  std::vector<double> residuals;
  double residual = 0.0;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next[s] = std::min(backup(mdp, v, s, Action::Sleep, lambda, beta),
                         backup(mdp, v, s, Action::Active, lambda, beta));
      residual = std::max(residual, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (options.record_residuals) residuals.push_back(residual);
    if (residual <= options.tol) return finish(mdp, std::move(v), lambda, beta, sweep, residual, std::move(residuals));
  }
  throw NotConverged("value iteration did not converge, residual " + std::to_string(residual), residual);
}

}  // namespace serial

ValueTable policy_evaluation(const TabularMdp& mdp, const Policy& policy, double lambda, double beta) {
  check_args(lambda, beta);
  const std::size_t n = mdp.num_states();
  policy.validate(n);
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(dim);
  for (std::size_t s = 0; s < n; ++s) {
    for (int ai = 0; ai < kNumActions; ++ai) {
      const Action a = action_from(ai);
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      cost(static_cast<Eigen::Index>(s)) += w * mdp.lagrangian_cost(s, a, lambda);
      for (const auto& [to, p] : mdp.kernel.sparse_row(s, a))
        system(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(to)) -= beta * w * p;
    }
  }
  const Eigen::VectorXd v = system.partialPivLu().solve(cost);
  return ValueTable{std::vector<double>(v.data(), v.data() + v.size())};
}

}  // namespace actsense
