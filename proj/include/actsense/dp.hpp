#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsense/model.hpp"
#include "actsense/policy.hpp"

namespace actsense {

struct ValueTable {
  std::vector<double> v;

  double operator()(std::size_t s) const { return v[s]; }
  std::size_t size() const { return v.size(); }
};

/// Q(s,a) laid out |S| x 2.
struct QTable {
  std::vector<double> q;

  QTable() = default;
  explicit QTable(std::size_t num_states, double init = 0.0) : q(num_states * kNumActions, init) {}

  double operator()(std::size_t s, Action a) const { return q[s * kNumActions + to_int(a)]; }
  double& operator()(std::size_t s, Action a) { return q[s * kNumActions + to_int(a)]; }
  std::size_t num_states() const { return q.size() / kNumActions; }
  /// Q(s,active) - Q(s,sleep).
  double gap(std::size_t s) const { return (*this)(s, Action::Active) - (*this)(s, Action::Sleep); }
  double min_at(std::size_t s) const;
};

/// Argmin over actions; active only when strictly cheaper by more than
/// tie_tol, otherwise sleep.
Action greedy_action(const QTable& q, std::size_t s, double tie_tol = 1e-12);
DeterministicPolicy greedy_policy(const QTable& q, double tie_tol = 1e-12);

class NotConverged : public std::runtime_error {
 public:
  NotConverged(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct ViOptions {
  double tol = 1e-8;
  std::size_t max_sweeps = 200000;
  /// Keep every sweep's residual (for the contraction check).
  bool record_residuals = false;
};

struct ViResult {
  ValueTable value;
  QTable q;
  DeterministicPolicy policy;
  std::size_t sweeps = 0;
  double residual = 0.0;
  std::vector<double> residuals;
};

/// Synchronous value iteration on c + lambda d: every sweep reads only the
/// previous sweep's table. Stops when the sup-norm change is <= tol; Q and the
/// policy come from the final v. Throws NotConverged.
ViResult value_iteration(const TabularMdp& mdp, double lambda, double beta, const ViOptions& options = {});

/// Q(s,a) = c(s,a) + lambda d(s,a) + beta sum_t P(t|s,a) v(t).
QTable q_from_value(const TabularMdp& mdp, const ValueTable& v, double lambda, double beta);

namespace serial {
ViResult value_iteration(const TabularMdp& mdp, double lambda, double beta, const ViOptions& options = {});
}

/// Solves v = c_pi + beta P_pi v directly (LU). beta must be < 1.
ValueTable policy_evaluation(const TabularMdp& mdp, const Policy& policy, double lambda, double beta);

}  // namespace actsense
